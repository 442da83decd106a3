"""Closed-form scalar fields: the explicit solution family, power solutions,
the trace profile, and the kernel of the linearized operator.

Fields are immutable value objects with vectorized evaluators (and optional
exact gradients) over points stored as (m, dim) arrays.  Domain tags record
where an evaluator is trusted:

    full-space            all of R^N
    half-space-positive   {x_N > 0}
    punctured-at-origin   R^N minus the origin
    unit-ball             open unit ball
    hyperplane            R^(N-1), used for trace profiles

The explicit solution exists only at alpha = 1, s = 1 + 2/N:

    U(x', x_N) = (2N / ((1 + |x_N|)^2 + |x'|^2))^(N/2),

with the full solution family lam^(d/2) U(lam x' + zeta, lam x_N) for
d = N - 2 + 2*alpha.  U contains |x_N|, so its x_N-derivative is one-sided off
the hyperplane and omitted (NaN) on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    NonpositiveAmplitude,
    NonpositiveDilation,
    NotInExplicitRegime,
)
from .params import ProblemParams, derive_exponents, in_explicit_regime, require_subcritical_s

FULL_SPACE = "full-space"
HALF_SPACE = "half-space-positive"
PUNCTURED = "punctured-at-origin"
UNIT_BALL = "unit-ball"
HYPERPLANE = "hyperplane"

Array = np.ndarray


def _as_points(x, dim: int) -> tuple[Array, bool]:
    """Coerce a single point or an (m, dim) batch to a 2-D float array."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        if pts.shape[0] != dim:
            raise ValueError(f"expected a point in R^{dim}, got shape {pts.shape}")
        return pts[None, :], True
    if pts.ndim == 2 and pts.shape[1] == dim:
        return pts, False
    raise ValueError(f"expected shape ({dim},) or (m, {dim}), got {pts.shape}")


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form scalar field with optional closed-form gradient.

    evaluator maps (m, dim) -> (m,); gradient maps (m, dim) -> (m, dim).
    """

    evaluator: Callable[[Array], Array]
    params: ProblemParams
    domain: str = FULL_SPACE
    gradient: Optional[Callable[[Array], Array]] = None
    ndim: Optional[int] = None

    @property
    def dim(self) -> int:
        return self.ndim if self.ndim is not None else self.params.N

    @property
    def has_gradient(self) -> bool:
        return self.gradient is not None

    def __call__(self, x):
        pts, single = _as_points(x, self.dim)
        vals = np.asarray(self.evaluator(pts), dtype=float)
        return float(vals[0]) if single else vals

    def grad(self, x):
        if self.gradient is None:
            raise ValueError("field carries no gradient")
        pts, single = _as_points(x, self.dim)
        g = np.asarray(self.gradient(pts), dtype=float)
        return g[0] if single else g


# ---------------------------------------------------------------------------
# generic constructors (coefficients K, perturbations, initial guesses)
# ---------------------------------------------------------------------------

def constant_field(p: ProblemParams, value: float, domain: str = FULL_SPACE) -> AnalyticField:
    def ev(pts):
        return np.full(pts.shape[0], float(value))

    def gr(pts):
        return np.zeros_like(pts)

    return AnalyticField(ev, p, domain, gr)


def coordinate_field(p: ProblemParams, axis: int) -> AnalyticField:
    """The coordinate x_axis (1-based axis index)."""
    j = axis - 1
    if not 0 <= j < p.N:
        raise ValueError(f"axis must be 1..{p.N}")

    def ev(pts):
        return pts[:, j].copy()

    def gr(pts):
        g = np.zeros_like(pts)
        g[:, j] = 1.0
        return g

    return AnalyticField(ev, p, FULL_SPACE, gr)


def radius_squared_field(p: ProblemParams) -> AnalyticField:
    def ev(pts):
        return np.sum(pts * pts, axis=1)

    def gr(pts):
        return 2.0 * pts

    return AnalyticField(ev, p, FULL_SPACE, gr)


def gaussian_bump(p: ProblemParams, width: float = 1.0) -> AnalyticField:
    """exp(-|x|^2 / width^2); compactly-supported-in-practice test field."""
    w2 = float(width) ** 2

    def ev(pts):
        return np.exp(-np.sum(pts * pts, axis=1) / w2)

    def gr(pts):
        v = np.exp(-np.sum(pts * pts, axis=1) / w2)
        return (-2.0 / w2) * pts * v[:, None]

    return AnalyticField(ev, p, FULL_SPACE, gr)


def add_fields(*fields: AnalyticField) -> AnalyticField:
    """Pointwise sum; gradient present iff every summand has one.

    The domain of the sum is the most restrictive tag among the summands
    (full-space absorbs into anything else)."""
    if not fields:
        raise ValueError("need at least one field")
    p = fields[0].params
    dim = fields[0].dim
    for f in fields:
        if f.dim != dim:
            raise ValueError("field dimensions differ")
    domain = FULL_SPACE
    for f in fields:
        if f.domain != FULL_SPACE:
            domain = f.domain

    def ev(pts):
        total = np.zeros(pts.shape[0])
        for f in fields:
            total = total + f.evaluator(pts)
        return total

    grad = None
    if all(f.has_gradient for f in fields):
        def grad(pts):
            total = np.zeros_like(pts)
            for f in fields:
                total = total + f.gradient(pts)
            return total

    return AnalyticField(ev, p, domain, grad, ndim=fields[0].ndim)


def scale_field(f: AnalyticField, c: float) -> AnalyticField:
    c = float(c)

    def ev(pts):
        return c * f.evaluator(pts)

    grad = None
    if f.has_gradient:
        def grad(pts):
            return c * f.gradient(pts)

    return AnalyticField(ev, f.params, f.domain, grad, ndim=f.ndim)


# ---------------------------------------------------------------------------
# the explicit solution and its family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyParameters:
    """Dilation lam > 0 and horizontal translation zeta in R^(N-1)."""

    lam: float
    zeta: tuple

    def zeta_array(self) -> Array:
        return np.asarray(self.zeta, dtype=float)


def _require_explicit_regime(p: ProblemParams) -> None:
    if not in_explicit_regime(p):
        raise NotInExplicitRegime(
            f"closed form requires alpha = 1 and s = 1 + 2/N; got alpha={p.alpha}, s={p.s}"
        )


def explicit_U(p: ProblemParams) -> AnalyticField:
    """The positive entire solution at alpha = 1, s = 1 + 2/N.

    U(x', x_N) = (2N / ((1+|x_N|)^2 + |x'|^2))^(N/2).  The gradient is exact
    off the hyperplane; its x_N component is NaN on {x_N = 0}.
    """
    _require_explicit_regime(p)
    N = p.N
    amp = (2.0 * N) ** (N / 2.0)
    half = N / 2.0

    def ev(pts):
        xn = pts[:, -1]
        den = (1.0 + np.abs(xn)) ** 2 + np.sum(pts[:, :-1] ** 2, axis=1)
        return amp * den ** (-half)

    def gr(pts):
        xn = pts[:, -1]
        den = (1.0 + np.abs(xn)) ** 2 + np.sum(pts[:, :-1] ** 2, axis=1)
        pref = -N * amp * den ** (-half - 1.0)
        g = np.empty_like(pts)
        g[:, :-1] = pref[:, None] * pts[:, :-1]
        g[:, -1] = np.where(xn == 0.0, np.nan, pref * (1.0 + np.abs(xn)) * np.sign(xn))
        return g

    return AnalyticField(ev, p, FULL_SPACE, gr)


def family_member(p: ProblemParams, fp: FamilyParameters) -> AnalyticField:
    """lam^((N-2+2a)/2) U(lam x' + zeta, lam x_N); the lam=1, zeta=0 member is
    U itself."""
    _require_explicit_regime(p)
    if not fp.lam > 0:
        raise NonpositiveDilation(f"dilation must be positive, got {fp.lam}")
    zeta = fp.zeta_array()
    if zeta.shape != (p.N - 1,):
        raise ValueError(f"zeta must lie in R^{p.N - 1}")
    U = explicit_U(p)
    lam = float(fp.lam)
    half_d = derive_exponents(p).decay_d / 2.0

    def warp(pts):
        q = np.empty_like(pts)
        q[:, :-1] = lam * pts[:, :-1] + zeta
        q[:, -1] = lam * pts[:, -1]
        return q

    def ev(pts):
        return lam ** half_d * U.evaluator(warp(pts))

    def gr(pts):
        return lam ** (half_d + 1.0) * U.gradient(warp(pts))

    return AnalyticField(ev, p, FULL_SPACE, gr)


def trace_profile(p: ProblemParams, u0: float, lam: float, x0) -> AnalyticField:
    """Hyperplane profile u0 (1 + lam^2 |x' - x0|^2)^(-(N-2+2a)/2); the exact
    shape of traces of entire positive solutions."""
    require_subcritical_s(p, "the trace profile")
    if not u0 > 0:
        raise NonpositiveAmplitude(f"amplitude must be positive, got {u0}")
    if not lam > 0:
        raise NonpositiveDilation(f"profile dilation must be positive, got {lam}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (p.N - 1,):
        raise ValueError(f"x0 must lie in R^{p.N - 1}")
    d = derive_exponents(p).decay_d
    u0 = float(u0)
    lam2 = float(lam) ** 2

    def ev(pts):
        q = pts - x0
        return u0 * (1.0 + lam2 * np.sum(q * q, axis=1)) ** (-d / 2.0)

    def gr(pts):
        q = pts - x0
        base = 1.0 + lam2 * np.sum(q * q, axis=1)
        return (-d * u0 * lam2) * q * (base ** (-(d + 2.0) / 2.0))[:, None]

    return AnalyticField(ev, p, HYPERPLANE, gr, ndim=p.N - 1)


# ---------------------------------------------------------------------------
# power solutions of the homogeneous operator
# ---------------------------------------------------------------------------

def power_divergence_coefficient(p: ProblemParams, l: float) -> float:
    """Coefficient c(l) with div(|x_N|^(2a) grad |x|^(-l)) = c(l) |x_N|^(2a) |x|^(-l-2).

    Written as l*(l - d) with d = N - 2 + 2*alpha so both roots l = 0 and
    l = d evaluate to exactly zero in floating point.
    """
    d = derive_exponents(p).decay_d
    return float(l) * (float(l) - d)


def power_solution(p: ProblemParams, l: float) -> AnalyticField:
    """|x|^(-l) on the punctured space, with exact gradient -l |x|^(-l-2) x."""
    l = float(l)

    def ev(pts):
        n2 = np.sum(pts * pts, axis=1)
        return n2 ** (-l / 2.0)

    def gr(pts):
        n2 = np.sum(pts * pts, axis=1)
        return (-l) * pts * (n2 ** (-(l + 2.0) / 2.0))[:, None]

    return AnalyticField(ev, p, PUNCTURED, gr)


# ---------------------------------------------------------------------------
# kernel of the linearization at U
# ---------------------------------------------------------------------------

def linearized_kernel(p: ProblemParams) -> list[AnalyticField]:
    """The N generators of the solution family's tangent space at U.

    V_i = dU/dx_i for i = 1..N-1 (translation directions) and
    V_N = (N/2) U + x . grad U (dilation direction).  V_N inherits the
    one-sided x_N-derivative of U and is undefined (NaN) on {x_N = 0}.
    """
    _require_explicit_regime(p)
    U = explicit_U(p)
    N = p.N
    fields: list[AnalyticField] = []

    for i in range(N - 1):
        def ev(pts, _i=i):
            return U.gradient(pts)[:, _i]

        fields.append(AnalyticField(ev, p, FULL_SPACE, None))

    def ev_dilation(pts):
        vals = U.evaluator(pts)
        g = U.gradient(pts)
        return (N / 2.0) * vals + np.sum(pts * g, axis=1)

    fields.append(AnalyticField(ev_dilation, p, FULL_SPACE, None))
    return fields
