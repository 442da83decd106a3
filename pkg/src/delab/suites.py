"""Verification suites behind `delab verify`.

Each suite builds a flat report {suite, params, grid, checks, pass_count,
fail_count} whose checks carry {name, value, expected, tol, mode, pass} with
mode "abs" or "rel".  One-sided requirements are encoded as "-shortfall" or
"-violation" checks whose value is the constraint violation (0 when
satisfied).  All random draws come from the documented 64-bit LCG, so reports
are byte-identical across reruns with the same flags.
"""

from __future__ import annotations

import numpy as np

from . import analytic, identities, probes, varmin, wgrid, xforms
from .errors import AxisOutOfRange, DelabError
from .params import ProblemParams, derive_exponents, in_explicit_regime
from .rng import Lcg64

SUITES = ("exponents", "transforms", "pohozaev", "kazdan-warner", "probes")


def _check(name, value, expected, tol, mode="abs"):
    value = float(value)
    expected = float(expected)
    if mode == "rel":
        ok = abs(value - expected) <= tol * max(abs(expected), np.finfo(float).tiny)
    else:
        ok = abs(value - expected) <= tol
    return {
        "name": name,
        "value": value,
        "expected": expected,
        "tol": float(tol),
        "mode": mode,
        "pass": bool(ok),
    }


def _shortfall(required, actual):
    """How far `actual` falls below `required` (0 when the bound is met)."""
    return max(0.0, required - actual)


def _report(name, p, dims, half_width, checks):
    return {
        "suite": name,
        "params": {"n": p.N, "alpha": p.alpha, "s": p.s},
        "grid": {"dims": list(dims), "L": half_width},
        "checks": checks,
        "pass_count": sum(1 for c in checks if c["pass"]),
        "fail_count": sum(1 for c in checks if not c["pass"]),
    }


# ---------------------------------------------------------------------------

def suite_exponents(p: ProblemParams, dims, half_width, seed=42):
    e = derive_exponents(p)
    N, a, s = p.N, p.alpha, p.s
    floor2a = float(np.floor(2.0 * a))
    checks = [
        _check("pstar-identity", e.pstar * (N - 2.0), 2.0 * (N - s), 1e-12),
        _check("weight-a-identity", e.weight_a, 2.0 * a, 1e-12),
        _check("weight-b-identity", e.weight_b, a * e.pstar - s, 1e-12),
        _check("decay-identity", e.decay_d, N - 2.0 + 2.0 * a, 1e-12),
        _check("hardy-lambda-identity", e.hardy_lambda, -a * (a - 1.0), 1e-12),
        _check("tau-identity", e.tau * floor2a, 2.0 * a - 1.0, 1e-12),
        _check("k-dim-identity", e.k_dim, floor2a + 2.0, 0.0),
        _check("beta-identity", e.beta, e.weight_b - e.weight_a, 1e-12),
        _check("sigma-identity", e.sigma_exp * e.tau, e.beta - 2.0 * (e.tau - 1.0), 1e-12),
        _check("pstar-at-s0", 2.0 * N / (N - 2.0) - 2.0 * (N - 0.0) / (N - 2.0), 0.0, 1e-12),
        _check("pstar-at-s2", 2.0 * (N - 2.0) / (N - 2.0), 2.0, 1e-12),
        _check("pstar-lower-shortfall", _shortfall(2.0, e.pstar), 0.0, 1e-12),
        _check("pstar-upper-excess", max(0.0, e.pstar - 2.0 * N / (N - 2.0)), 0.0, 1e-12),
        _check("hardy-lambda-quarter-excess", max(0.0, e.hardy_lambda - 0.25), 0.0, 0.0),
        _check("weight-b-integrable-shortfall", max(0.0, -1.0 - e.weight_b), 0.0, 0.0),
        _check("power-coefficient-at-zero", analytic.power_divergence_coefficient(p, 0.0), 0.0, 0.0),
        _check("power-coefficient-at-decay",
               analytic.power_divergence_coefficient(p, e.decay_d), 0.0, 0.0),
    ]
    if p.s < 2.0:
        red = xforms.radial_reduction(p)
        lhs = (red.k_dim + 2.0 + 2.0 * red.sigma_exp) / (red.k_dim - 2.0)
        checks.append(_check("sigma-above-minus-two-shortfall",
                             max(0.0, -2.0 - red.sigma_exp), 0.0, 0.0))
        checks.append(_check("reduced-subcriticality-shortfall",
                             max(0.0, (e.pstar - 1.0) - lhs), 0.0, 0.0))
    return _report("exponents", p, dims, half_width, checks)


# ---------------------------------------------------------------------------

def _residual_decrease_factor(tf, points, h):
    coarse = max(abs(xforms.residual_at(tf, x, h)) for x in points)
    fine = max(abs(xforms.residual_at(tf, x, h / 2.0)) for x in points)
    return coarse / max(fine, np.finfo(float).tiny)


def suite_transforms(p: ProblemParams, dims, half_width, seed=42):
    e = derive_exponents(p)
    rng = Lcg64(seed)
    checks = []

    bump = analytic.gaussian_bump(p)
    pts = np.array([rng.point_in_annulus(0.5, 2.0, 0.05, p.N) for _ in range(100)])
    lam = 1.7
    twice = xforms.kelvin(xforms.kelvin(bump, lam, p), lam, p)
    rel = np.max(np.abs(twice.evaluator(pts) - bump.evaluator(pts))
                 / np.maximum(np.abs(bump.evaluator(pts)), 1e-300))
    checks.append(_check("kelvin-involution-max-relerr", rel, 0.0, 1e-12))

    one = analytic.constant_field(p, 1.0)
    kel = xforms.kelvin(one, 2.0, p)
    expect = 2.0 ** e.decay_d * np.sum(pts * pts, axis=1) ** (-e.decay_d / 2.0)
    rel = np.max(np.abs(kel.evaluator(pts) - expect) / expect)
    checks.append(_check("kelvin-of-constant-max-relerr", rel, 0.0, 1e-12))

    hardy = xforms.to_hardy(one, p)
    checks.append(_check("hardy-coefficient", hardy.hardy_coefficient, e.hardy_lambda, 0.0))
    lift = xforms.hyperbolic_lift(hardy, p)
    checks.append(_check("hyperbolic-mass-coefficient", lift.mass_coefficient,
                         e.hardy_lambda + p.N * (p.N - 2.0) / 4.0, 0.0))

    origin = np.zeros(p.N)
    north = np.zeros(p.N)
    north[-1] = 1.0
    h0 = xforms.ball_point_map(origin)
    checks.append(_check("ball-map-origin-to-pole", float(np.linalg.norm(h0 - north)), 0.0, 1e-15))
    h1 = xforms.ball_point_map(north)
    checks.append(_check("ball-map-pole-to-origin", float(np.linalg.norm(h1)), 0.0, 1e-15))
    checks.append(_check("ball-density-origin", xforms.ball_density(origin, p),
                         2.0 ** ((p.N - 2.0) / 2.0), 1e-15))

    if in_explicit_regime(p) and p.N == 3:
        U = analytic.explicit_U(p)
        hardy_u = xforms.to_hardy(U, p)
        lift_u = xforms.hyperbolic_lift(hardy_u, p)
        ball_u = xforms.ball_map(hardy_u, p)
        half_pts = [np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 1.2)])
                    for _ in range(20)]
        ball_pts = []
        while len(ball_pts) < 20:
            x = rng.point_in_box(0.8, 3)
            if np.linalg.norm(x) < 0.8:
                ball_pts.append(x)
        h = 1e-2
        for name, tf, points in (
            ("hardy", hardy_u, half_pts),
            ("hyperbolic", lift_u, half_pts),
            ("ball", ball_u, ball_pts),
        ):
            factor = _residual_decrease_factor(tf, points, h)
            checks.append(_check(f"{name}-residual-decrease-shortfall",
                                 _shortfall(3.0, factor), 0.0, 0.0))
    return _report("transforms", p, dims, half_width, checks)


# ---------------------------------------------------------------------------

def suite_pohozaev(p: ProblemParams, dims, half_width, seed=42):
    e = derive_exponents(p)
    rng = Lcg64(seed)
    checks = []

    power = analytic.power_solution(p, e.decay_d)
    worst = 0.0
    for _ in range(1000):
        sigma = rng.uniform(0.5, 2.0)
        x = rng.point_on_sphere(sigma, p.N)
        scale = (abs(x[-1]) ** e.weight_a * e.decay_d ** 2
                 * sigma ** (-2.0 * e.decay_d - 1.0)) or 1.0
        worst = max(worst, abs(identities.boundary_density_B(power, x, sigma, p)) / scale)
    checks.append(_check("power-density-pointwise-max", worst, 0.0, 1e-12))

    if p.N == 3:
        q1 = identities.build_sphere_quadrature(1.0)
        b_term = identities.sphere_integral_of_B(power, 1.0, p, q1)
        scale = 0.5 * e.decay_d ** 2 * 4.0 * np.pi
        checks.append(_check("power-density-sphere-term", b_term / scale, 0.0, 1e-12))

        zero = analytic.constant_field(p, 0.0)
        limit = identities.pohozaev_limit_value(1.0, p)
        for sigma in (1.0, 0.5, 0.25):
            vals = identities.pohozaev_limit_probe(1.0, zero, [sigma], p)
            checks.append(_check(f"limit-probe-sigma-{sigma}", vals[0], limit, 1e-6, "rel"))

        x1 = analytic.coordinate_field(p, 1)
        vals = identities.pohozaev_limit_probe(1.0, x1, [1.0, 0.5, 0.25], p)
        errs = np.abs(vals - limit)
        checks.append(_check("limit-probe-xi-monotone-shortfall",
                             _shortfall(0.0, float(np.min(errs[:-1] - errs[1:]))), 0.0, 0.0))

        if in_explicit_regime(p):
            U = analytic.explicit_U(p)
            K = analytic.constant_field(p, 1.0)
            rep = identities.pohozaev_check(U, K, 1.0, p, volume_cells=64)
            scale = max(abs(rep.boundary_K_term), abs(rep.boundary_B_term))
            checks.append(_check("exact-solution-residual-over-terms",
                                 abs(rep.residual) / scale, 0.0, 1e-2))
            coarse = identities.pohozaev_check(
                U, K, 1.0, p, volume_cells=32,
                sphere=identities.build_sphere_quadrature(1.0, 8, 24, rule="uniform"))
            fine = identities.pohozaev_check(
                U, K, 1.0, p, volume_cells=64,
                sphere=identities.build_sphere_quadrature(1.0, 16, 48, rule="uniform"))
            floor = 1e-12 * scale
            allowed = max(0.5 * abs(coarse.residual), floor)
            checks.append(_check("refinement-halving-excess",
                                 max(0.0, abs(fine.residual) - allowed), 0.0, 0.0))
    return _report("pohozaev", p, dims, half_width, checks)


# ---------------------------------------------------------------------------

def suite_kazdan_warner(p: ProblemParams, dims, half_width, seed=42):
    checks = []
    if p.N != 3:
        return _report("kazdan-warner", p, dims, half_width, checks)
    if in_explicit_regime(p):
        u = analytic.explicit_U(p)
    else:
        u = analytic.gaussian_bump(p)

    K1 = analytic.constant_field(p, 1.0)
    val = identities.kazdan_warner_radial(u, K1, p, half_width, cells_per_axis=32)
    checks.append(_check("constant-coefficient-zero", val, 0.0, 0.0))

    Kr2 = analytic.radius_squared_field(p)
    coarse = identities.kazdan_warner_radial(u, Kr2, p, half_width, cells_per_axis=32)
    fine = identities.kazdan_warner_radial(u, Kr2, p, half_width, cells_per_axis=64)
    err = abs(fine - coarse)
    flag = 1.0 if fine > 10.0 * err else 0.0
    checks.append(_check("radial-detector-flag", flag, 1.0, 0.0))

    Kx1 = analytic.coordinate_field(p, 1)
    coarse = identities.kazdan_warner_translation(u, Kx1, 1, p, half_width, cells_per_axis=32)
    fine = identities.kazdan_warner_translation(u, Kx1, 1, p, half_width, cells_per_axis=64)
    err = abs(fine - coarse)
    flag = 1.0 if abs(fine) > 10.0 * err else 0.0
    checks.append(_check("translation-detector-flag", flag, 1.0, 0.0))

    try:
        identities.kazdan_warner_translation(u, Kx1, p.N, p, half_width, cells_per_axis=4)
        guard = 0.0
    except AxisOutOfRange:
        guard = 1.0
    checks.append(_check("vertical-axis-rejected", guard, 1.0, 0.0))
    return _report("kazdan-warner", p, dims, half_width, checks)


# ---------------------------------------------------------------------------

def suite_probes(p: ProblemParams, dims, half_width, seed=42):
    e = derive_exponents(p)
    checks = []
    if p.N != 3 or p.s >= 2.0:
        return _report("probes", p, dims, half_width, checks)

    spec = wgrid.GridSpec(tuple(dims), half_width)
    shift = np.zeros(3)
    shift[0] = 2.0 * half_width

    def shifted_power(pts):
        q = pts - shift
        return np.sum(q * q, axis=1) ** (-e.decay_d / 2.0)

    g = wgrid.GridField(spec, shifted_power(spec.centers()).reshape(spec.dims))
    f = wgrid.zeros_like(spec)
    sol = wgrid.solve_dirichlet(g, f, p, tol=1e-8)
    rep = probes.boundary_min_probe(sol)
    checks.append(_check("boundary-min-weak-violation", max(0.0, -rep.margin), 0.0, 1e-10))
    checks.append(_check("boundary-min-strong-flag", 1.0 if rep.strong_pass else 0.0, 1.0, 0.0))

    const = analytic.constant_field(p, 3.0)
    checks.append(_check("harnack-of-constant", probes.harnack_ratio(const, 0.5, p), 1.0, 1e-12))

    kel = xforms.kelvin(analytic.constant_field(p, 1.0), 2.0, p)
    slope = probes.decay_exponent(kel, np.linspace(8.0, 32.0, 9))
    checks.append(_check("kelvin-decay-slope", slope, -e.decay_d, 1e-8))

    mix = analytic.add_fields(
        analytic.scale_field(analytic.power_solution(p, e.decay_d), 5.0),
        analytic.constant_field(p, 2.0),
    )
    fit = probes.singularity_fit(mix, np.array([0.4, 0.3, 0.2, 0.1, 0.05]), p)
    checks.append(_check("singularity-fit-C", fit.C_hat, 5.0, 1e-8))
    checks.append(_check("singularity-fit-b0", fit.b0_hat, 2.0, 1e-8))
    checks.append(_check("singularity-fit-residual", fit.residual, 0.0, 1e-10))

    sqrt_field = _abs_xn_power_field(p, 0.5)
    fit_sq = probes.gradient_bound_probe(sqrt_field, np.geomspace(1e-3, 1e-1, 7))
    checks.append(_check("gradient-bound-sqrt-exponent", fit_sq.exponent, -0.5, 0.05))
    bad = _abs_xn_power_field(p, -2.0)
    fit_bad = probes.gradient_bound_probe(bad, np.geomspace(1e-3, 1e-1, 7))
    checks.append(_check("gradient-bound-violation-detected",
                         0.0 if fit_bad.within_bound else 1.0, 1.0, 0.0))

    if in_explicit_regime(p):
        U = analytic.explicit_U(p)
        ratio = probes.harnack_ratio(U, 0.5, p, samples_per_axis=64)
        checks.append(_check("harnack-of-explicit-solution", ratio, 2.25 ** 1.5, 1e-2, "rel"))
        slope_u = probes.decay_exponent(U, np.linspace(8.0, 32.0, 9))
        checks.append(_check("explicit-decay-slope", slope_u, -e.decay_d, 0.05 * e.decay_d))
        checks.append(_check("inversion-radius-at-origin",
                             probes.inversion_radius_estimate(U, np.zeros(2), p), 1.0, 1e-12))
        checks.append(_check("inversion-radius-unit-shift",
                             probes.inversion_radius_estimate(U, np.array([1.0, 0.0]), p),
                             np.sqrt(2.0), 1e-12, "rel"))
        fit_u = probes.gradient_bound_probe(U, np.geomspace(1e-3, 1e-1, 7))
        checks.append(_check("gradient-bound-U-shortfall",
                             _shortfall(-0.1, fit_u.exponent), 0.0, 0.0))
    return _report("probes", p, dims, half_width, checks)


def _abs_xn_power_field(p: ProblemParams, power: float):
    def ev(pts):
        return np.abs(pts[:, -1]) ** power

    def gr(pts):
        g = np.zeros_like(pts)
        xn = pts[:, -1]
        g[:, -1] = power * np.abs(xn) ** (power - 1.0) * np.sign(xn)
        return g

    return analytic.AnalyticField(ev, p, analytic.FULL_SPACE, gr)


_RUNNERS = {
    "exponents": suite_exponents,
    "transforms": suite_transforms,
    "pohozaev": suite_pohozaev,
    "kazdan-warner": suite_kazdan_warner,
    "probes": suite_probes,
}


def run_suite(name: str, p: ProblemParams, dims, half_width: float, seed: int = 42):
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return _RUNNERS[name](p, tuple(dims), float(half_width), seed)
