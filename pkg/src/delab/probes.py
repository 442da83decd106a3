"""Conclusion-level checks of the qualitative theory: Harnack ratio, discrete
maximum principle, isolated-singularity decomposition, decay exponent,
hyperplane gradient bound, and the inversion-radius calibration.

These probes report numbers; they never assert paper-free constants (the
Harnack constant, for instance, is existential and is only reported).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .analytic import AnalyticField
from .errors import (
    IllConditionedFit,
    NonpositiveField,
    NonpositiveSamples,
    NonpositiveValue,
)
from .identities import build_sphere_quadrature, sphere_integral
from .params import ProblemParams, derive_exponents, require_subcritical_s
from .wgrid import GridField, ring_mask


@dataclass(frozen=True)
class SingularityFit:
    """Least-squares decomposition u ~ C |x|^(-d) + b0 near the origin."""

    C_hat: float
    b0_hat: float
    residual: float


@dataclass(frozen=True)
class BoundaryMinReport:
    margin: float
    weak_pass: bool
    strong_pass: bool
    boundary_constant: bool


@dataclass(frozen=True)
class GradientBoundFit:
    exponent: float
    within_bound: bool


def harnack_ratio(
    u: Union[AnalyticField, GridField],
    radius: float,
    p: ProblemParams,
    samples_per_axis: int = 64,
) -> float:
    """sup/inf of a positive field over the closed ball of the given radius.

    Analytic fields are sampled on the (n+1)^3 node lattice of the bounding
    box, which contains the ball center and the axis poles; grid fields use
    their cell centers.  Raises NonpositiveField when the sampled infimum is
    not positive.
    """
    require_subcritical_s(p, "the Harnack probe")
    if isinstance(u, GridField):
        pts = u.spec.centers()
        vals = u.flat()
    else:
        axis = np.linspace(-radius, radius, samples_per_axis + 1)
        g = np.meshgrid(axis, axis, axis, indexing="ij")
        pts = np.stack([a.ravel() for a in g], axis=1)
        vals = None
    keep = np.sum(pts * pts, axis=1) <= radius * radius * (1.0 + 1e-12)
    pts = pts[keep]
    if pts.shape[0] == 0:
        raise ValueError("no sample points inside the ball")
    vals = u.evaluator(pts) if vals is None else vals[keep]
    lo = float(np.min(vals))
    if lo <= 0.0:
        raise NonpositiveField(f"field infimum {lo} is not positive on the ball")
    return float(np.max(vals)) / lo


def boundary_min_probe(u: GridField, tol: float = 1e-12) -> BoundaryMinReport:
    """Discrete maximum-principle check for a field solving the homogeneous
    Dirichlet problem: interior minimum against boundary-ring minimum.

    weak_pass: interior min >= ring min (up to tol * scale); strong_pass:
    strictly greater whenever the ring data is not constant.
    """
    ring = ring_mask(u.spec)
    ring_vals = u.values[ring]
    inner_vals = u.values[~ring]
    scale = max(float(np.max(np.abs(u.values))), 1.0)
    margin = float(np.min(inner_vals) - np.min(ring_vals))
    constant = float(np.max(ring_vals) - np.min(ring_vals)) <= tol * scale
    weak = margin >= -tol * scale
    strong = constant or margin > 0.0
    return BoundaryMinReport(
        margin=margin, weak_pass=weak, strong_pass=weak and strong, boundary_constant=constant
    )


def spherical_means(
    u: AnalyticField,
    radii: Sequence[float],
    n_polar: int = 8,
    n_azimuth: int = 24,
) -> np.ndarray:
    """Means of the field over origin-centered spheres."""
    out = np.empty(len(radii))
    for i, r in enumerate(radii):
        q = build_sphere_quadrature(r, n_polar, n_azimuth)
        out[i] = sphere_integral(u, q) / float(np.sum(q.weights))
    return out


def singularity_fit(
    u: AnalyticField, radii: Sequence[float], p: ProblemParams
) -> SingularityFit:
    """Fit spherical means against {r^(-d), 1} by linear least squares.

    Recovers the coefficient of an isolated singularity and the regular part
    at the origin; a large residual flags a decomposition mismatch.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2:
        raise IllConditionedFit("need at least two radii")
    means = spherical_means(u, radii)
    d = derive_exponents(p).decay_d
    col_sing = radii ** (-d)
    design = np.stack([col_sing / np.max(col_sing), np.ones_like(radii)], axis=1)
    if np.linalg.cond(design) > 1e12:
        raise IllConditionedFit("radii make the power/constant design degenerate")
    coef, _, _, _ = np.linalg.lstsq(design, means, rcond=None)
    c_hat = coef[0] / np.max(col_sing)
    fitted = design @ coef
    residual = float(np.linalg.norm(fitted - means) / max(np.linalg.norm(means), 1e-300))
    return SingularityFit(C_hat=float(c_hat), b0_hat=float(coef[1]), residual=residual)


def decay_exponent(
    u: AnalyticField,
    radii: Sequence[float],
    n_polar: int = 8,
    n_azimuth: int = 24,
) -> float:
    """Log-log slope of spherical means against radius."""
    radii = np.asarray(radii, dtype=float)
    means = spherical_means(u, radii, n_polar, n_azimuth)
    if np.any(means <= 0.0):
        raise NonpositiveSamples("spherical means must be positive for a log-log fit")
    slope, _ = np.polyfit(np.log(radii), np.log(means), 1)
    return float(slope)


def gradient_bound_probe(
    u: AnalyticField,
    band_radii: Sequence[float],
    half_extent: float = 0.5,
    lattice: int = 21,
) -> GradientBoundFit:
    """Fit the growth of max_{|x'| <= half_extent} |du/dx_N(x', t)| as t -> 0.

    Solutions satisfy |du/dx_N| <= C |x_N|^(-1); the probe reports the fitted
    exponent and whether it clears -1 (with 0.1 slack).  Synthetic non-
    solutions may violate the bound, which the flag then records.
    """
    if not u.has_gradient:
        raise ValueError("gradient probe needs a field with a gradient")
    ts = np.asarray(band_radii, dtype=float)
    axis = np.linspace(-half_extent, half_extent, lattice)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    keep = (g1 ** 2 + g2 ** 2) <= half_extent ** 2
    xy = np.stack([g1[keep], g2[keep]], axis=1)
    maxima = np.empty(ts.size)
    for i, t in enumerate(ts):
        pts = np.concatenate([xy, np.full((xy.shape[0], 1), t)], axis=1)
        gn = u.gradient(pts)[:, -1]
        maxima[i] = float(np.max(np.abs(gn)))
    if np.any(maxima <= 0.0):
        # flat in x_N: bound satisfied trivially
        return GradientBoundFit(exponent=0.0, within_bound=True)
    slope, _ = np.polyfit(np.log(ts), np.log(maxima), 1)
    return GradientBoundFit(exponent=float(slope), within_bound=slope >= -1.1)


def inversion_radius_estimate(u: AnalyticField, b, p: ProblemParams) -> float:
    """Calibration radius (u(0) / u(b, 0))^(1/d) of the inversion that fixes
    a positive entire solution relative to the horizontal shift b."""
    require_subcritical_s(p, "the inversion-radius calibration")
    b = np.asarray(b, dtype=float)
    if b.shape != (p.N - 1,):
        raise ValueError(f"shift must lie in R^{p.N - 1}")
    origin = np.zeros(p.N)
    shifted = np.concatenate([b, [0.0]])
    v0 = float(u(origin))
    vb = float(u(shifted))
    if vb <= 0.0:
        raise NonpositiveValue(f"field value {vb} at the shifted point is not positive")
    if v0 <= 0.0:
        raise NonpositiveValue(f"field value {v0} at the origin is not positive")
    d = derive_exponents(p).decay_d
    return (v0 / vb) ** (1.0 / d)
