"""Change-of-variable maps between the equation's equivalent forms.

Convention fixed here (the u/v naming varies in the literature): u denotes the
anisotropic-side field solving -div(|x_N|^(2a) grad u) = |x_N|^b |u|^(p-2) u,
v = x_N^a u is the Hardy side on the half space, and the ball and hyperbolic
fields are lifts of v:

    hardy        v = x_N^a u          -lap v = lam_H v / x_N^2 + |v|^(p-2) v / x_N^s
    ball         w = (v o H) rho      -lap w = 4 lam_H w/(1-|x|^2)^2
                                               + 2^s |w|^(p-2) w/(1-|x|^2)^s
    hyperbolic   W = x_N^((N-2)/2) v  -lap_hyp W = (lam_H + N(N-2)/4) W + |W|^(p-2) W

with lam_H = -alpha(alpha-1), H the ball-to-half-space map

    H(x) = (2x' / (1+2x_N+|x|^2), (1-|x|^2) / (1+2x_N+|x|^2)),
    rho(x) = (2 / (1+2x_N+|x|^2))^((N-2)/2),

and lap_hyp W = x_N^2 lap W - (N-2) x_N dW/dx_N.  Note
x_N^((N-2)/2) v = x_N^((N-2+2a)/2) u, so the hyperbolic lift of the Hardy side
is the usual half-density lift of the anisotropic field.

Residuals of all four target equations are checked by one centered
finite-difference oracle (`residual_at`) rather than by transforming
derivatives analytically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .analytic import (
    FULL_SPACE,
    HALF_SPACE,
    PUNCTURED,
    UNIT_BALL,
    AnalyticField,
    _as_points,
)
from .errors import (
    NonpositiveDilation,
    OutsideDomain,
    SingularPoint,
    SOutOfRange,
    TooCloseToSingularSet,
)
from .params import ProblemParams, derive_exponents, require_subcritical_s

TARGET_ANISOTROPIC = "anisotropic"
TARGET_HARDY = "hardy"
TARGET_BALL = "ball"
TARGET_HYPERBOLIC = "hyperbolic"
TARGET_RADIAL_ODE = "radial-ode"

_SINGULAR_DEN = 1e-12


@dataclass(frozen=True)
class TransformedField:
    """A field together with the equation its residual is checked against."""

    field: AnalyticField
    target: str
    params: ProblemParams
    hardy_coefficient: float
    mass_coefficient: Optional[float] = None


def _hardy_side(v: Union[AnalyticField, TransformedField]) -> AnalyticField:
    if isinstance(v, TransformedField):
        if v.target != TARGET_HARDY:
            raise ValueError(f"expected a Hardy-side field, got target {v.target!r}")
        return v.field
    return v


# ---------------------------------------------------------------------------
# Kelvin inversion
# ---------------------------------------------------------------------------

def kelvin(u: AnalyticField, lam: float, p: ProblemParams) -> AnalyticField:
    """Kelvin transform (lam^d / |x|^d) u(lam^2 x / |x|^2) with d = N-2+2a.

    Maps solutions to solutions and is an involution for fixed lam.
    """
    if not lam > 0:
        raise NonpositiveDilation(f"dilation must be positive, got {lam}")
    lam = float(lam)
    d = derive_exponents(p).decay_d
    lam2 = lam * lam

    def invert(pts):
        n2 = np.sum(pts * pts, axis=1)
        return lam2 * pts / n2[:, None], n2

    def ev(pts):
        y, n2 = invert(pts)
        return lam ** d * n2 ** (-d / 2.0) * u.evaluator(y)

    grad = None
    if u.has_gradient:
        def grad(pts):
            y, n2 = invert(pts)
            vals = u.evaluator(y)
            gu = u.gradient(y)
            pref = lam ** d * n2 ** (-d / 2.0)
            # d/dx of the prefactor
            g = (-d) * pref[:, None] * pts / n2[:, None] * vals[:, None]
            # chain rule through y = lam^2 x / |x|^2 (symmetric Jacobian)
            dot = np.sum(gu * pts, axis=1)
            jac_t = lam2 * (gu / n2[:, None] - 2.0 * pts * (dot / (n2 * n2))[:, None])
            return g + pref[:, None] * jac_t

    return AnalyticField(ev, p, PUNCTURED, grad)


def inversion(u: AnalyticField, p: ProblemParams) -> AnalyticField:
    """Kelvin transform with lam = 1: |x|^(-d) u(x/|x|^2)."""
    return kelvin(u, 1.0, p)


# ---------------------------------------------------------------------------
# Hardy substitution and lifts
# ---------------------------------------------------------------------------

def to_hardy(u: AnalyticField, p: ProblemParams) -> TransformedField:
    """Hardy-side field v = x_N^alpha u on the half space {x_N > 0}."""
    alpha = p.alpha
    lam_h = derive_exponents(p).hardy_lambda

    def ev(pts):
        xn = pts[:, -1]
        pos = np.maximum(xn, 0.0)
        vals = pos ** alpha * u.evaluator(pts)
        return np.where(xn > 0.0, vals, np.nan)

    grad = None
    if u.has_gradient:
        def grad(pts):
            xn = pts[:, -1]
            pos = np.maximum(xn, 1e-300)
            vals = u.evaluator(pts)
            g = pos[:, None] ** alpha * u.gradient(pts)
            g[:, -1] += alpha * pos ** (alpha - 1.0) * vals
            g[xn <= 0.0] = np.nan
            return g

    field = AnalyticField(ev, p, HALF_SPACE, grad)
    return TransformedField(field, TARGET_HARDY, p, lam_h)


def hyperbolic_lift(v, p: ProblemParams) -> TransformedField:
    """Half-density lift W = x_N^((N-2)/2) v of a Hardy-side field.

    The target equation carries the mass coefficient lam_H + N(N-2)/4.
    """
    vf = _hardy_side(v)
    e = derive_exponents(p)
    expo = (p.N - 2.0) / 2.0
    mass = e.hardy_lambda + p.N * (p.N - 2.0) / 4.0

    def ev(pts):
        xn = pts[:, -1]
        pos = np.maximum(xn, 0.0)
        return np.where(xn > 0.0, pos ** expo * vf.evaluator(pts), np.nan)

    grad = None
    if vf.has_gradient:
        def grad(pts):
            xn = pts[:, -1]
            pos = np.maximum(xn, 1e-300)
            vals = vf.evaluator(pts)
            g = pos[:, None] ** expo * vf.gradient(pts)
            g[:, -1] += expo * pos ** (expo - 1.0) * vals
            g[xn <= 0.0] = np.nan
            return g

    field = AnalyticField(ev, p, HALF_SPACE, grad)
    return TransformedField(field, TARGET_HYPERBOLIC, p, e.hardy_lambda, mass_coefficient=mass)


def ball_point_map(x) -> np.ndarray:
    """H(x) = (2x', 1-|x|^2) / (1+2x_N+|x|^2); sends the unit ball to the
    upper half space."""
    pts, single = _as_points(x, np.asarray(x, dtype=float).shape[-1])
    den = 1.0 + 2.0 * pts[:, -1] + np.sum(pts * pts, axis=1)
    if np.any(den <= _SINGULAR_DEN):
        raise SingularPoint("ball map denominator vanishes")
    out = np.empty_like(pts)
    out[:, :-1] = 2.0 * pts[:, :-1] / den[:, None]
    out[:, -1] = (1.0 - np.sum(pts * pts, axis=1)) / den
    return out[0] if single else out


def ball_density(x, p: ProblemParams) -> Union[float, np.ndarray]:
    """Conformal density rho(x) = (2 / (1+2x_N+|x|^2))^((N-2)/2)."""
    pts, single = _as_points(x, p.N)
    den = 1.0 + 2.0 * pts[:, -1] + np.sum(pts * pts, axis=1)
    if np.any(den <= _SINGULAR_DEN):
        raise SingularPoint("ball map denominator vanishes")
    rho = (2.0 / den) ** ((p.N - 2.0) / 2.0)
    return float(rho[0]) if single else rho


def ball_map(v, p: ProblemParams) -> TransformedField:
    """Unit-ball field w = (v o H) rho from a Hardy-side half-space field."""
    vf = _hardy_side(v)
    lam_h = derive_exponents(p).hardy_lambda
    expo = (p.N - 2.0) / 2.0

    def ev(pts):
        n2 = np.sum(pts * pts, axis=1)
        den = 1.0 + 2.0 * pts[:, -1] + n2
        if np.any(den <= _SINGULAR_DEN):
            raise SingularPoint("ball map denominator vanishes")
        inside = n2 < 1.0
        h = np.empty_like(pts)
        h[:, :-1] = 2.0 * pts[:, :-1] / den[:, None]
        h[:, -1] = (1.0 - n2) / den
        vals = np.full(pts.shape[0], np.nan)
        if np.any(inside):
            rho = (2.0 / den[inside]) ** expo
            vals[inside] = vf.evaluator(h[inside]) * rho
        return vals

    field = AnalyticField(ev, p, UNIT_BALL, None)
    return TransformedField(field, TARGET_BALL, p, lam_h)


def as_anisotropic(u: AnalyticField, p: ProblemParams) -> TransformedField:
    """Tag an anisotropic-side field for residual checks of the original
    divergence-form equation (with unit coefficient)."""
    return TransformedField(u, TARGET_ANISOTROPIC, p, derive_exponents(p).hardy_lambda)


# ---------------------------------------------------------------------------
# radial ODE reduction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialReduction:
    """Descriptor of the reduced Lane-Emden-type problem
    -lap u = coefficient |x|^sigma_exp u^(pstar-1) on R^k_dim."""

    tau: float
    k_dim: int
    sigma_exp: float
    coefficient: float


def radial_reduction(p: ProblemParams) -> RadialReduction:
    """Reduce the x_N-radial ODE to a Lane-Emden problem in k = floor(2a)+2
    dimensions via y = r^tau / tau; requires s < 2.

    Verifies the admissibility conditions sigma > -2 and
    (k+2+2*sigma)/(k-2) > pstar - 1 which the reduction needs.
    """
    require_subcritical_s(p, "the radial reduction")
    e = derive_exponents(p)
    coeff = e.tau ** e.sigma_exp
    if not e.sigma_exp > -2.0:
        raise ArithmeticError(f"reduced exponent {e.sigma_exp} violates sigma > -2")
    lhs = (e.k_dim + 2.0 + 2.0 * e.sigma_exp) / (e.k_dim - 2.0)
    if not lhs > e.pstar - 1.0:
        raise ArithmeticError(
            f"subcriticality (k+2+2s)/(k-2)={lhs} <= pstar-1={e.pstar - 1.0}"
        )
    return RadialReduction(tau=e.tau, k_dim=e.k_dim, sigma_exp=e.sigma_exp, coefficient=coeff)


# ---------------------------------------------------------------------------
# finite-difference residual oracle
# ---------------------------------------------------------------------------

def _standoff_checks(tf: TransformedField, x: np.ndarray, h: float) -> None:
    n = float(np.sqrt(x @ x))
    xn = float(x[-1])
    if tf.target == TARGET_BALL:
        if n >= 1.0:
            raise OutsideDomain(f"|x|={n} is not inside the unit ball")
        if n >= 1.0 - 2.0 * h:
            raise TooCloseToSingularSet("within 2h of the ball boundary")
        return
    if tf.target in (TARGET_HARDY, TARGET_HYPERBOLIC):
        if xn <= 0.0:
            raise OutsideDomain(f"x_N={xn} is not in the half space")
        if xn <= 2.0 * h:
            raise TooCloseToSingularSet("within 2h of the hyperplane")
        return
    if tf.target == TARGET_ANISOTROPIC:
        if abs(xn) <= 2.0 * h:
            raise TooCloseToSingularSet("within 2h of the degenerate hyperplane")
        if tf.field.domain == PUNCTURED and n <= 2.0 * h:
            raise TooCloseToSingularSet("within 2h of the puncture")
        return
    raise ValueError(f"no residual operator for target {tf.target!r}")


def _stencil(f: AnalyticField, x: np.ndarray, h: float):
    """Center value, per-axis (f(x+he_i), f(x-he_i)) values, and laplacian."""
    n = x.shape[0]
    pts = [x]
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        pts.append(x + e)
        pts.append(x - e)
    vals = f.evaluator(np.asarray(pts))
    center = vals[0]
    plus = vals[1::2]
    minus = vals[2::2]
    lap = float(np.sum(plus + minus - 2.0 * center)) / (h * h)
    return float(center), plus, minus, lap


def residual_at(tf: TransformedField, x, h: float) -> float:
    """Centered second-order residual of the tagged target equation at x.

    For an exact solution the value decays like O(h^2) away from singular
    sets; points closer than 2h to a singular set are rejected.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (tf.params.N,):
        raise ValueError(f"expected a point in R^{tf.params.N}")
    if tf.target == TARGET_RADIAL_ODE:
        raise ValueError("the radial reduction is a descriptor, not a field; no residual")
    _standoff_checks(tf, x, h)
    p = tf.params
    e = derive_exponents(p)
    center, plus, minus, lap = _stencil(tf.field, x, h)
    nonlin = abs(center) ** (e.pstar - 2.0) * center if center != 0.0 else 0.0
    xn = float(x[-1])

    if tf.target == TARGET_ANISOTROPIC:
        # flux form with the exact weight |x_N|^(2a) at half-steps
        div = 0.0
        for i in range(p.N):
            xp = abs(xn + (0.5 * h if i == p.N - 1 else 0.0)) ** (2.0 * p.alpha)
            xm = abs(xn - (0.5 * h if i == p.N - 1 else 0.0)) ** (2.0 * p.alpha)
            div += (xp * (plus[i] - center) - xm * (center - minus[i])) / (h * h)
        return float(-div - abs(xn) ** e.weight_b * nonlin)

    if tf.target == TARGET_HARDY:
        return float(-lap - e.hardy_lambda * center / xn ** 2 - nonlin / xn ** p.s)

    if tf.target == TARGET_BALL:
        r2 = float(x @ x)
        gap = 1.0 - r2
        return float(
            -lap
            - 4.0 * e.hardy_lambda * center / gap ** 2
            - 2.0 ** p.s * nonlin / gap ** p.s
        )

    # hyperbolic: -lap_hyp W - mass W - |W|^(p-2) W
    dn = (plus[-1] - minus[-1]) / (2.0 * h)
    lap_hyp = xn ** 2 * lap - (p.N - 2.0) * xn * dn
    return float(-lap_hyp - tf.mass_coefficient * center - nonlin)
