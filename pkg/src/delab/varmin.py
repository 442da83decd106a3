"""Best-constant estimation by projected Rayleigh-quotient descent and the
extraction of a discrete ground state.

The quotient R(u) = E(u) / P(u)^(2/pstar) with E the weighted gradient energy
and P the weighted critical integral is minimized over grid fields that
vanish on the boundary ring, under the constraint P(u) = 1 (renormalized
after every step, which keeps the recorded Rayleigh sequence monotone).  On
the constraint manifold the gradient is

    grad R = 2 h^3 (L u - E * w_b |u|^(pstar-2) u),

so descent steps only need the discrete operator and the cell weights.  An
optional projection clips negative values (ground states are positive).  The
converged minimizer rescales to a discrete solution of the original equation:
if R is the final quotient then c = R^(1/(pstar-2)) makes c*u satisfy
L u = w_b |u|^(pstar-2) u up to discretization error.

The trace of the ground state on the cell layer nearest {x_N = 0} is fitted
against the exact profile family u0 (1 + lam^2 |x' - x0|^2)^(-d/2); the
relative L2 misfit of that fit is the cross-validation against the known
shape of entire solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .errors import DegenerateTrace, NoConvergence, NotConverged, ZeroDenominator
from .params import ProblemParams, derive_exponents, require_subcritical_s
from .wgrid import (
    GridField,
    GridSpec,
    _lp_cell_weights,
    apply_L,
    ring_mask,
    weighted_energy,
    weighted_lp,
)


@dataclass(frozen=True)
class MinimizerConfig:
    max_iters: int = 2000
    tol_rel: float = 1e-7
    step_init: float = 1.0
    step_shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    positivity: bool = True

    def __post_init__(self):
        if not self.tol_rel > 0:
            raise ValueError("tol_rel must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise ValueError("shrink factor must lie in (0, 1)")


@dataclass(frozen=True)
class ProfileFit:
    amplitude: float
    lam: float
    center: tuple
    rel_l2_misfit: float
    degenerate: bool


@dataclass(frozen=True)
class GroundStateResult:
    field: GridField
    rayleigh: float
    iterations: int
    converged: bool
    history: np.ndarray
    fitted_profile: Optional[ProfileFit]


@dataclass(frozen=True)
class RescaledSolution:
    field: GridField
    scale_c: float
    interior_residual: float


def rayleigh(u: GridField, p: ProblemParams) -> float:
    """Weighted energy over the critical integral to the power 2/pstar;
    scale-invariant and bounded below by the discrete best constant."""
    e = derive_exponents(p)
    lp = weighted_lp(u, p)
    if lp <= 0.0:
        raise ZeroDenominator("critical integral vanishes")
    return weighted_energy(u, p) / lp ** (2.0 / e.pstar)


def _lp_of(values: np.ndarray, wb_cells: np.ndarray, pstar: float, vol: float) -> float:
    return float(np.sum(wb_cells * np.abs(values) ** pstar)) * vol


def minimize_rayleigh(
    u0: GridField, p: ProblemParams, cfg: MinimizerConfig = MinimizerConfig()
) -> GroundStateResult:
    """Projected gradient descent on the Rayleigh quotient.

    The iterate is pinned to zero on the boundary ring, renormalized to
    P(u) = 1 after every accepted step, and optionally clipped nonnegative.
    Accepted steps satisfy an Armijo-type decrease, so the recorded sequence
    is strictly nonincreasing; convergence is declared when the relative
    decrease falls below tol_rel.
    """
    require_subcritical_s(p, "ground-state extraction")
    e = derive_exponents(p)
    spec = u0.spec
    vol = spec.cell_volume()
    ring = ring_mask(spec)
    wb = np.broadcast_to(
        _lp_cell_weights(spec, e.weight_b)[None, None, :], spec.dims
    ).copy()

    v = u0.values.copy()
    v[ring] = 0.0
    if cfg.positivity:
        v = np.maximum(v, 0.0)
    lp = _lp_of(v, wb, e.pstar, vol)
    if lp <= 0.0:
        raise ZeroDenominator("initial iterate has vanishing critical integral")
    v = v / lp ** (1.0 / e.pstar)

    def energy_and_gradient(values):
        lu = apply_L(GridField(spec, values), p).values
        en = float(np.sum(lu * values)) * vol
        return en, lu

    energy, lu = energy_and_gradient(v)
    history = [energy]
    step = cfg.step_init
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iters + 1):
        grad = 2.0 * vol * (lu - energy * wb * np.abs(v) ** (e.pstar - 2.0) * v)
        grad[ring] = 0.0
        gnorm2 = float(np.sum(grad * grad))
        if gnorm2 == 0.0:
            converged = True
            break

        accepted = False
        t = step
        for _ in range(60):
            cand = v - t * grad
            if cfg.positivity:
                cand = np.maximum(cand, 0.0)
            cand[ring] = 0.0
            lp = _lp_of(cand, wb, e.pstar, vol)
            if lp <= 0.0:
                raise ZeroDenominator("iterate collapsed to zero")
            cand = cand / lp ** (1.0 / e.pstar)
            cand_energy, cand_lu = energy_and_gradient(cand)
            if cand_energy <= energy - cfg.sufficient_decrease * t * gnorm2:
                accepted = True
                break
            if cand_energy < energy:
                accepted = True
                break
            t *= cfg.step_shrink
        if not accepted:
            converged = True  # no admissible decrease left at machine scale
            break

        rel = (energy - cand_energy) / max(energy, np.finfo(float).tiny)
        v, energy, lu = cand, cand_energy, cand_lu
        history.append(energy)
        step = t / cfg.step_shrink  # gentle warm start for the next search
        if rel < cfg.tol_rel:
            converged = True
            break

    field = GridField(spec, v)
    fit = None
    if p.s < 2.0:
        try:
            fit = fit_profile(*extract_trace(field), p)
        except DegenerateTrace:
            fit = None
    return GroundStateResult(
        field=field,
        rayleigh=energy,
        iterations=iterations,
        converged=converged,
        history=np.asarray(history),
        fitted_profile=fit,
    )


def rescale_to_solution(
    r: GroundStateResult, p: ProblemParams, band: float = 0.2
) -> RescaledSolution:
    """Rescale the constrained minimizer to a discrete solution.

    With the final quotient R, the multiplier of the constrained problem is R
    itself, so c = R^(1/(pstar-2)).  The reported residual is
    ||L u - w_b |u|^(p-2) u||_2 / ||L u||_2 over interior cells off the band
    |x_N| <= band.
    """
    require_subcritical_s(p, "solution rescaling")
    if not r.converged:
        raise NotConverged("minimizer did not converge")
    e = derive_exponents(p)
    c = r.rayleigh ** (1.0 / (e.pstar - 2.0))
    spec = r.field.spec
    vals = c * r.field.values
    field = GridField(spec, vals)

    lu = apply_L(field, p).values
    wb = np.broadcast_to(
        _lp_cell_weights(spec, e.weight_b)[None, None, :], spec.dims
    )
    rhs = wb * np.abs(vals) ** (e.pstar - 2.0) * vals
    xn = spec.axis_coords(2)
    keep = ~ring_mask(spec)
    keep &= (np.abs(xn) > band)[None, None, :]
    num = float(np.linalg.norm((lu - rhs)[keep]))
    den = float(np.linalg.norm(lu[keep]))
    residual = num / den if den > 0 else np.inf
    return RescaledSolution(field=field, scale_c=c, interior_residual=residual)


# ---------------------------------------------------------------------------
# trace extraction and profile fitting
# ---------------------------------------------------------------------------

def extract_trace(field: GridField):
    """Values of the field on the cell layer nearest {x_N = 0} (the layer at
    x_N = +h/2) with its in-plane coordinates."""
    spec = field.spec
    k = spec.dims[2] // 2
    return field.values[:, :, k], spec.axis_coords(0), spec.axis_coords(1)


def fit_profile(
    trace: np.ndarray, x1: np.ndarray, x2: np.ndarray, p: ProblemParams
) -> ProfileFit:
    """Least-squares fit of the trace against
    u0 (1 + lam^2 |x' - x0|^2)^(-d/2).

    Returns the fitted parameters and the relative L2 misfit; a fit driven to
    lam ~ 0 (constant profile) is flagged degenerate.
    """
    require_subcritical_s(p, "the trace profile")
    d = derive_exponents(p).decay_d
    data = np.asarray(trace, dtype=float)
    if data.shape != (x1.size, x2.size):
        raise ValueError("trace shape does not match coordinates")
    peak = float(np.max(data))
    if peak <= 0.0:
        raise DegenerateTrace("trace is nonpositive everywhere")

    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    i0, j0 = np.unravel_index(int(np.argmax(data)), data.shape)
    span = max(float(x1[-1] - x1[0]), float(x2[-1] - x2[0]))

    # width guess from the radius where the profile halves
    rr = np.sqrt((g1 - x1[i0]) ** 2 + (g2 - x2[j0]) ** 2)
    below = data <= 0.5 * peak
    half_factor = np.sqrt(2.0 ** (2.0 / d) - 1.0)
    r_half = float(np.min(rr[below])) if np.any(below) else 0.5 * span
    lam0 = half_factor / max(r_half, 1e-6)

    def model(theta):
        u0, lam, c1, c2 = theta
        q = 1.0 + lam * lam * ((g1 - c1) ** 2 + (g2 - c2) ** 2)
        return u0 * q ** (-d / 2.0)

    def residuals(theta):
        return (model(theta) - data).ravel()

    theta0 = np.array([peak, lam0, float(x1[i0]), float(x2[j0])])
    sol = least_squares(
        residuals,
        theta0,
        bounds=([1e-300, 0.0, -np.inf, -np.inf], np.inf),
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
    )
    u0, lam, c1, c2 = sol.x
    misfit = float(np.linalg.norm(sol.fun) / np.linalg.norm(data))
    degenerate = lam * span < 1e-6
    return ProfileFit(
        amplitude=float(u0),
        lam=float(lam),
        center=(float(c1), float(c2)),
        rel_l2_misfit=misfit,
        degenerate=degenerate,
    )
