"""Command-line front end.

Commands:
    delab verify        run a verification suite, emit a JSON report
    delab best-constant Rayleigh-quotient descent over (alpha, s) cells, CSV
    delab transform     apply a change-of-variable map to a field file
    delab convergence   residual refinement studies, plain-text table

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or validation error.
Reports carry no timestamps and all randomness comes from the seeded LCG, so
identical flags reproduce byte-identical output.  --threads (or the
DELAB_THREADS environment variable) caps implicit kernel parallelism; it is
applied before numpy is imported.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--n", type=int, default=3)
        sp.add_argument("--alpha", type=float, default=1.0)
        sp.add_argument("--s", type=float, default=1.6666667)
        sp.add_argument("--grid", type=int, default=32)
        sp.add_argument("--L", type=float, default=8.0)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--threads", type=int, default=None)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", default="all",
                    help="exponents|transforms|pohozaev|kazdan-warner|probes|all")
    common(sp)
    sp.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    sp = sub.add_parser("best-constant", help="estimate the best constant per (alpha, s)")
    sp.add_argument("--alpha", default="1.0", help="comma-separated alpha values")
    sp.add_argument("--s", default="1.6666667", help="comma-separated s values")
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--grid", type=int, default=32)
    sp.add_argument("--L", type=float, default=8.0)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--max-iters", type=int, default=2000)
    sp.add_argument("--threads", type=int, default=None)

    sp = sub.add_parser("transform", help="transform a field file")
    sp.add_argument("--op", required=True, choices=["kelvin", "invert", "hardy", "lift", "ball"])
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--out", dest="outfile", required=True)
    sp.add_argument("--lam", type=float, default=1.0)
    common(sp)

    sp = sub.add_parser("convergence", help="refinement study tables")
    sp.add_argument("--grids", default="16,32,64", help="comma-separated grid sizes")
    sp.add_argument("--quantity", default="apply-L", choices=["apply-L", "pohozaev-residual"])
    common(sp)
    return ap


def _apply_thread_cap(threads):
    if threads is None:
        threads = os.environ.get("DELAB_THREADS")
    if threads is None:
        return
    threads = int(threads)
    if threads < 1:
        raise ValueError("--threads must be >= 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(threads)


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        _apply_thread_cap(args.threads)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    # numerical modules are imported after the thread cap is in place
    from .errors import DelabError
    from .params import validate_params

    try:
        if args.command == "verify":
            return _cmd_verify(args, validate_params)
        if args.command == "best-constant":
            return _cmd_best_constant(args, validate_params)
        if args.command == "transform":
            return _cmd_transform(args, validate_params)
        if args.command == "convergence":
            return _cmd_convergence(args, validate_params)
    except DelabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


def _cmd_verify(args, validate_params) -> int:
    from .suites import SUITES, run_suite

    p = validate_params(args.n, args.alpha, args.s)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    dims = (args.grid,) * 3
    reports = [run_suite(name, p, dims, args.L, args.seed) for name in names]
    payload = reports[0] if len(reports) == 1 else {
        "suite": "all",
        "reports": reports,
        "pass_count": sum(r["pass_count"] for r in reports),
        "fail_count": sum(r["fail_count"] for r in reports),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    failures = payload["fail_count"]
    return 0 if failures == 0 else 1


def _cmd_best_constant(args, validate_params) -> int:
    from .analytic import gaussian_bump
    from .errors import DelabError
    from .varmin import MinimizerConfig, minimize_rayleigh
    from .wgrid import GridSpec, sample

    alphas = [float(t) for t in str(args.alpha).split(",") if t.strip()]
    svals = [float(t) for t in str(args.s).split(",") if t.strip()]
    if not alphas or not svals:
        raise ValueError("need at least one alpha and one s value")
    spec = GridSpec((args.grid,) * 3, args.L)
    cfg = MinimizerConfig(max_iters=args.max_iters)
    rows = ["alpha,s,N,dims,L,rayleigh,iters,converged"]
    any_ok = False
    for a in alphas:
        for s in svals:
            p = validate_params(args.n, a, s)
            u0 = sample(gaussian_bump(p), spec)
            try:
                res = minimize_rayleigh(u0, p, cfg)
                ok = res.converged
                rows.append(
                    f"{a!r},{s!r},{p.N},{args.grid},{args.L!r},"
                    f"{res.rayleigh!r},{res.iterations},{str(res.converged).lower()}"
                )
            except DelabError as exc:
                ok = False
                rows.append(f"{a!r},{s!r},{p.N},{args.grid},{args.L!r},nan,0,failed:{type(exc).__name__}")
            any_ok = any_ok or ok
    print("\n".join(rows))
    return 0 if any_ok else 1


def _cmd_transform(args, validate_params) -> int:
    import numpy as np

    from . import xforms
    from .analytic import AnalyticField, FULL_SPACE
    from .params import derive_exponents
    from .wgrid import GridField, GridSpec, read_field, write_awf1, write_csv

    if not os.path.exists(args.infile):
        raise ValueError(f"missing input file {args.infile!r}")
    field, file_params = read_field(args.infile, half_width=args.L)
    p = file_params if file_params is not None else validate_params(args.n, args.alpha, args.s)
    e = derive_exponents(p)
    spec = field.spec
    pts = spec.centers()
    vals = field.values
    out = np.zeros(pts.shape[0])
    zero_filled = 0
    singular = 0

    def interp(points):
        """Trilinear interpolation on cell centers; NaN outside the hull."""
        res = np.full(points.shape[0], np.nan)
        coords = []
        ok = np.ones(points.shape[0], dtype=bool)
        for a in range(3):
            ax = spec.axis_coords(a)
            t = (points[:, a] - ax[0]) / (ax[1] - ax[0])
            ok &= (t >= 0.0) & (t <= ax.size - 1.0)
            coords.append(np.clip(t, 0.0, ax.size - 1.0))
        i = [np.clip(np.floor(c).astype(int), 0, spec.dims[a] - 2) for a, c in enumerate(coords)]
        f = [c - idx for c, idx in zip(coords, i)]
        acc = np.zeros(points.shape[0])
        for d1 in (0, 1):
            for d2 in (0, 1):
                for d3 in (0, 1):
                    w = ((f[0] if d1 else 1 - f[0])
                         * (f[1] if d2 else 1 - f[1])
                         * (f[2] if d3 else 1 - f[2]))
                    acc += w * vals[i[0] + d1, i[1] + d2, i[2] + d3]
        res[ok] = acc[ok]
        return res

    if args.op in ("kelvin", "invert"):
        lam = 1.0 if args.op == "invert" else args.lam
        if lam <= 0:
            raise ValueError("--lam must be positive")
        n2 = np.sum(pts * pts, axis=1)
        src = lam * lam * pts / n2[:, None]
        mapped = interp(src)
        pref = lam ** e.decay_d * n2 ** (-e.decay_d / 2.0)
        good = np.isfinite(mapped)
        out[good] = pref[good] * mapped[good]
        zero_filled = int(np.sum(~good))
    elif args.op == "hardy":
        xn = pts[:, 2]
        out = np.where(xn > 0, np.maximum(xn, 0) ** p.alpha * vals.reshape(-1), 0.0)
        zero_filled = int(np.sum(xn <= 0))
    elif args.op == "lift":
        xn = pts[:, 2]
        out = np.where(xn > 0, np.maximum(xn, 0) ** ((p.N - 2.0) / 2.0) * vals.reshape(-1), 0.0)
        zero_filled = int(np.sum(xn <= 0))
    else:  # ball
        n2 = np.sum(pts * pts, axis=1)
        den = 1.0 + 2.0 * pts[:, 2] + n2
        inside = (n2 < 1.0) & (den > 1e-12)
        singular = int(np.sum((n2 < 1.0) & (den <= 1e-12)))
        h = np.empty_like(pts)
        h[:, :2] = 2.0 * pts[:, :2] / np.where(den == 0, 1.0, den)[:, None]
        h[:, 2] = (1.0 - n2) / np.where(den == 0, 1.0, den)
        mapped = np.full(pts.shape[0], np.nan)
        mapped[inside] = interp(h[inside])
        rho = np.zeros(pts.shape[0])
        rho[inside] = (2.0 / den[inside]) ** ((p.N - 2.0) / 2.0)
        good = np.isfinite(mapped)
        out[good] = mapped[good] * rho[good]
        zero_filled = int(np.sum(~good))

    result = GridField(spec, out.reshape(spec.dims))
    if args.outfile.endswith(".csv"):
        write_csv(args.outfile, result)
    else:
        write_awf1(args.outfile, result, p)
    print(json.dumps({
        "op": args.op,
        "cells": int(np.prod(spec.dims)),
        "zero_filled": zero_filled,
        "singular_cells": singular,
        "out": args.outfile,
    }, indent=2))
    return 0


def _cmd_convergence(args, validate_params) -> int:
    import numpy as np

    from . import analytic, identities, wgrid
    from .params import derive_exponents, in_explicit_regime

    grids = [int(t) for t in str(args.grids).split(",") if t.strip()]
    if len(grids) < 2:
        raise ValueError("need at least two grid sizes")
    p = validate_params(args.n, args.alpha, args.s)
    e = derive_exponents(p)
    residuals = []
    if args.quantity == "apply-L":
        power = analytic.power_solution(p, e.decay_d)
        for d in grids:
            spec = wgrid.GridSpec((d,) * 3, args.L)
            u = wgrid.sample(power, spec)
            lu = wgrid.apply_L(u, p).values
            pts = spec.centers()
            r = np.sqrt(np.sum(pts * pts, axis=1)).reshape(spec.dims)
            xn = np.abs(pts[:, 2]).reshape(spec.dims)
            keep = (r > 1.0) & (r < 2.0) & (xn > 0.2) & ~wgrid.ring_mask(spec)
            residuals.append(float(np.max(np.abs(lu[keep]))))
    else:
        if not in_explicit_regime(p):
            raise ValueError("pohozaev-residual study needs alpha=1, s=1+2/N")
        U = analytic.explicit_U(p)
        K = analytic.constant_field(p, 1.0)
        for d in grids:
            n_polar = max(4, d // 8)
            sphere = identities.build_sphere_quadrature(1.0, n_polar, 3 * n_polar, rule="uniform")
            rep = identities.pohozaev_check(U, K, 1.0, p, volume_cells=d, sphere=sphere)
            residuals.append(abs(rep.residual))

    lines = ["grid,h,residual,order"]
    for i, d in enumerate(grids):
        h = 2.0 * args.L / d
        if i == 0:
            order = ""
        else:
            ratio = residuals[i - 1] / max(residuals[i], np.finfo(float).tiny)
            order = f"{np.log2(ratio) / np.log2(grids[i] / grids[i - 1]):.3f}"
        lines.append(f"{d},{h!r},{residuals[i]!r},{order}")
    print("\n".join(lines))
    return 0


if __name__ == "__main__":
    sys.exit(main())
