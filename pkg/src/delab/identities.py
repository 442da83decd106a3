"""Sphere quadrature, the Pohozaev boundary density, the full sphere/ball
identity, and the nonexistence integrals tied to the coefficient K.

The identity evaluated by `pohozaev_check` balances, for a solution u of the
K-weighted equation on the ball B_sigma(0),

    (1/pstar) int_{B_sigma} (x . grad K) |x_N|^b |u|^pstar
      - (1/pstar) int_{dB_sigma} (x . n) K |x_N|^b |u|^pstar
      = int_{dB_sigma} B(sigma, x, u, grad u)

with the boundary density

    B = (d/2) |x_N|^(2a) u du/dn - (sigma/2) |x_N|^(2a) |grad u|^2
        + sigma |x_N|^(2a) (du/dn)^2,      d = N - 2 + 2a,  n = x/|x|.

B vanishes identically on the pure power solution |x|^(-d), and for
u = |x|^(-d) + A + xi (xi annihilated by the operator, xi(0) = 0) the sphere
integral of B tends to -(A d^2 / 2) int_{dB_1} |x_N|^(2a) as sigma -> 0.

Sphere rules are product rules in (polar cosine, azimuth).  The default
"gauss" rule applies Gauss-Legendre per hemisphere, which is exact for
polynomials of degree <= 8 on the sphere and - because |x_N|^w integrands are
smooth per hemisphere - accurate far beyond that; no node lies on the
hyperplane.  The "uniform" rule (midpoint x midpoint) is first-principles
coarse and is the one used for refinement studies, where a measurable error
must shrink under node doubling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .analytic import AnalyticField, add_fields, constant_field, power_solution
from .errors import (
    AxisOutOfRange,
    NonFiniteSample,
    PointNotOnSphere,
)
from .params import ProblemParams, derive_exponents
from .wgrid import GridSpec, _lp_cell_weights, _require_grid_params


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes and weights on the origin-centered sphere of radius sigma."""

    sigma: float
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class PohozaevReport:
    volume_term: float
    boundary_K_term: float
    boundary_B_term: float

    @property
    def residual(self) -> float:
        return self.volume_term - self.boundary_K_term - self.boundary_B_term


def build_sphere_quadrature(
    sigma: float,
    n_polar: int = 8,
    n_azimuth: int = 24,
    rule: str = "gauss",
) -> SphereQuadrature:
    """Product rule on the sphere of radius sigma (three dimensions).

    n_polar counts nodes per hemisphere in the polar cosine; n_azimuth counts
    equispaced midpoints in the azimuth.  Weights sum to 4 pi sigma^2 exactly
    and scale as sigma^2, so homogeneous integrands scale exactly.
    """
    if not sigma > 0:
        raise ValueError("sphere radius must be positive")
    if rule == "gauss":
        xi, wi = np.polynomial.legendre.leggauss(n_polar)
        mu_half = 0.5 * (xi + 1.0)          # hemisphere (0, 1)
        w_half = 0.5 * wi
    elif rule == "uniform":
        mu_half = (np.arange(n_polar) + 0.5) / n_polar
        w_half = np.full(n_polar, 1.0 / n_polar)
    else:
        raise ValueError(f"unknown sphere rule {rule!r}")
    mu = np.concatenate([mu_half, -mu_half])
    wmu = np.concatenate([w_half, w_half])
    phi = (np.arange(n_azimuth) + 0.5) * (2.0 * np.pi / n_azimuth)
    wphi = 2.0 * np.pi / n_azimuth

    sin_th = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    nodes = np.empty((mu.size * n_azimuth, 3))
    weights = np.empty(mu.size * n_azimuth)
    k = 0
    for i in range(mu.size):
        for j in range(n_azimuth):
            nodes[k, 0] = sigma * sin_th[i] * np.cos(phi[j])
            nodes[k, 1] = sigma * sin_th[i] * np.sin(phi[j])
            nodes[k, 2] = sigma * mu[i]
            weights[k] = sigma * sigma * wmu[i] * wphi
            k += 1
    return SphereQuadrature(sigma=float(sigma), nodes=nodes, weights=weights)


def sphere_integral(f, q: SphereQuadrature) -> float:
    """Sum of weights times samples; f is an AnalyticField or a callable on
    (m, 3) point arrays."""
    ev = f.evaluator if isinstance(f, AnalyticField) else f
    vals = np.asarray(ev(q.nodes), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSample("integrand not finite at a quadrature node")
    return float(np.dot(q.weights, vals))


# ---------------------------------------------------------------------------
# the boundary density
# ---------------------------------------------------------------------------

def _density_B_values(
    u: AnalyticField, pts: np.ndarray, sigma: float, p: ProblemParams
) -> np.ndarray:
    e = derive_exponents(p)
    vals = u.evaluator(pts)
    grads = u.gradient(pts)
    normals = pts / sigma
    dn = np.sum(grads * normals, axis=1)
    grad2 = np.sum(grads * grads, axis=1)
    w = np.abs(pts[:, -1]) ** e.weight_a
    return w * (0.5 * e.decay_d * vals * dn - 0.5 * sigma * grad2 + sigma * dn * dn)


def boundary_density_B(u: AnalyticField, x, sigma: float, p: ProblemParams) -> float:
    """The Pohozaev boundary density at a point of the sphere |x| = sigma.

    Requires the field's closed-form gradient; raises PointNotOnSphere when
    | |x| - sigma | > 1e-9 sigma.
    """
    if not u.has_gradient:
        raise ValueError("boundary density needs a field with a gradient")
    pts = np.asarray(x, dtype=float)[None, :]
    r = float(np.sqrt(np.sum(pts * pts)))
    if abs(r - sigma) > 1e-9 * sigma:
        raise PointNotOnSphere(f"|x|={r} is not on the sphere of radius {sigma}")
    return float(_density_B_values(u, pts, sigma, p)[0])


def sphere_integral_of_B(
    u: AnalyticField, sigma: float, p: ProblemParams, q: SphereQuadrature = None
) -> float:
    if q is None:
        q = build_sphere_quadrature(sigma)
    if abs(q.sigma - sigma) > 1e-12 * sigma:
        raise PointNotOnSphere("quadrature radius differs from requested sigma")
    return sphere_integral(lambda pts: _density_B_values(u, pts, sigma, p), q)


# ---------------------------------------------------------------------------
# ball quadrature (tensor midpoint with exact |x_N| weight)
# ---------------------------------------------------------------------------

def _ball_volume_sum(
    integrand: Callable[[np.ndarray], np.ndarray],
    sigma: float,
    p: ProblemParams,
    cells_per_axis: int,
    weight_exponent: float,
) -> float:
    """Sum over cells of [-sigma, sigma]^3 whose centers lie in the ball of
    the integrand at centers times the exact cell mean of |x_N|^w times cell
    volume."""
    spec = GridSpec((cells_per_axis,) * 3, sigma)
    pts = spec.centers()
    inside = np.sum(pts * pts, axis=1) < sigma * sigma
    wb = _lp_cell_weights(spec, weight_exponent)
    wcell = np.broadcast_to(wb[None, None, :], spec.dims).reshape(-1)
    vals = np.zeros(pts.shape[0])
    if np.any(inside):
        vals[inside] = integrand(pts[inside])
    return float(np.sum(vals * wcell * inside)) * spec.cell_volume()


def pohozaev_check(
    u: AnalyticField,
    K: AnalyticField,
    sigma: float,
    p: ProblemParams,
    volume_cells: int = 64,
    sphere: SphereQuadrature = None,
) -> PohozaevReport:
    """Evaluate the three terms of the sphere/ball identity by quadrature.

    Volume term by tensor midpoint with exact |x_N|^b cell integrals and a
    cell-center ball indicator; boundary terms on the given sphere rule.  The
    residual of an exact solution tends to zero under refinement; with K
    constant the volume term is exactly zero.
    """
    _require_grid_params(p)
    if not (u.has_gradient and K.has_gradient):
        raise ValueError("identity check needs gradients for u and K")
    e = derive_exponents(p)
    if sphere is None:
        sphere = build_sphere_quadrature(sigma)

    def vol_integrand(pts):
        xdotgk = np.sum(pts * K.gradient(pts), axis=1)
        return xdotgk * np.abs(u.evaluator(pts)) ** e.pstar

    volume_term = (
        _ball_volume_sum(vol_integrand, sigma, p, volume_cells, e.weight_b) / e.pstar
    )

    def k_integrand(pts):
        w = np.abs(pts[:, -1]) ** e.weight_b
        return K.evaluator(pts) * w * np.abs(u.evaluator(pts)) ** e.pstar

    boundary_K = sigma * sphere_integral(k_integrand, sphere) / e.pstar
    boundary_B = sphere_integral(
        lambda pts: _density_B_values(u, pts, sigma, p), sphere
    )
    return PohozaevReport(volume_term, boundary_K, boundary_B)


def pohozaev_limit_probe(
    A: float,
    xi: AnalyticField,
    sigmas: Sequence[float],
    p: ProblemParams,
    n_polar: int = 8,
    n_azimuth: int = 24,
) -> np.ndarray:
    """Sphere integrals of B for u = |x|^(-d) + A + xi over a decreasing
    radius sequence; converges to -(A d^2 / 2) int_{dB_1} |x_N|^(2a)."""
    if not A > 0:
        raise ValueError("the additive constant A must be positive")
    e = derive_exponents(p)
    u = add_fields(power_solution(p, e.decay_d), constant_field(p, A), xi)
    out = np.empty(len(sigmas))
    for i, sigma in enumerate(sigmas):
        q = build_sphere_quadrature(sigma, n_polar, n_azimuth)
        out[i] = sphere_integral(lambda pts: _density_B_values(u, pts, sigma, p), q)
    return out


def pohozaev_limit_value(A: float, p: ProblemParams) -> float:
    """Closed form of the sigma -> 0 limit:
    -(A d^2 / 2) * 4 pi / (2 alpha + 1) in three dimensions."""
    e = derive_exponents(p)
    return -0.5 * A * e.decay_d ** 2 * 4.0 * np.pi / (2.0 * p.alpha + 1.0)


# ---------------------------------------------------------------------------
# nonexistence integrals
# ---------------------------------------------------------------------------

def kazdan_warner_radial(
    u: AnalyticField,
    K: AnalyticField,
    p: ProblemParams,
    half_width: float = 8.0,
    cells_per_axis: int = 64,
) -> float:
    """int (x . grad K) |x_N|^b |u|^pstar over the truncated box; zero for
    every solution, so a sign-definite nonzero value certifies nonexistence."""
    _require_grid_params(p)
    e = derive_exponents(p)
    spec = GridSpec((cells_per_axis,) * 3, half_width)
    pts = spec.centers()
    xdotgk = np.sum(pts * K.gradient(pts), axis=1)
    vals = xdotgk * np.abs(u.evaluator(pts)) ** e.pstar
    wb = np.broadcast_to(
        _lp_cell_weights(spec, e.weight_b)[None, None, :], spec.dims
    ).reshape(-1)
    return float(np.sum(vals * wb)) * spec.cell_volume()


def kazdan_warner_translation(
    u: AnalyticField,
    K: AnalyticField,
    axis: int,
    p: ProblemParams,
    half_width: float = 8.0,
    cells_per_axis: int = 64,
) -> float:
    """int (dK/dx_i) |x_N|^b |u|^pstar over the truncated box for a tangential
    axis 1 <= i <= N-1; the vertical axis is rejected."""
    _require_grid_params(p)
    if not 1 <= axis <= p.N - 1:
        raise AxisOutOfRange(f"axis must be 1..{p.N - 1}, got {axis}")
    e = derive_exponents(p)
    spec = GridSpec((cells_per_axis,) * 3, half_width)
    pts = spec.centers()
    dk = K.gradient(pts)[:, axis - 1]
    vals = dk * np.abs(u.evaluator(pts)) ** e.pstar
    wb = np.broadcast_to(
        _lp_cell_weights(spec, e.weight_b)[None, None, :], spec.dims
    ).reshape(-1)
    return float(np.sum(vals * wb)) * spec.cell_volume()


def kw_tail_bound(
    u: AnalyticField,
    p: ProblemParams,
    half_width: float,
    k_scale: float = 1.0,
) -> float:
    """Crude bound on the truncated tail of the nonexistence integrals from
    the |x|^(-d) decay: C_hat estimated on the boundary shell, then the
    radial tail integrated in closed form."""
    e = derive_exponents(p)
    shell = np.array(
        [
            [half_width, 0.0, 0.3 * half_width],
            [0.0, half_width, 0.3 * half_width],
            [0.6 * half_width, 0.6 * half_width, 0.5 * half_width],
            [0.0, 0.0, half_width],
        ]
    )
    r = np.sqrt(np.sum(shell * shell, axis=1))
    c_hat = float(np.max(np.abs(u.evaluator(shell)) * r ** e.decay_d))
    expo = e.weight_b - e.pstar * e.decay_d + 3.0
    if expo >= 0.0:
        return np.inf
    return 4.0 * np.pi * k_scale * c_hat ** e.pstar * half_width ** expo / (-expo)
