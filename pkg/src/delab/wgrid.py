"""Cell-centered tensor grids, the weight-exact divergence-form operator,
quadratures, a preconditioned CG Dirichlet solve, and field-file I/O.

Grids are cell-centered on [-L, L]^3 with even cell counts so that no sample
sits on the degenerate hyperplane {x_N = 0} or at the origin.  The operator

    (L u)_c = -(1/h^2) sum_faces w_face (u_nb - u_c),      ghosts = 0,

uses per-face transmissibilities: faces normal to x_N average |t|^(2a) exactly
over the h-interval between the two cell centers (closed form, including the
face that straddles t = 0), faces tangent to x_N use the shared cell-center
value |x_N|^(2a).  This keeps the operator symmetric and positive semidefinite
and handles alpha near 1/2 where the weight has an unbounded derivative.

Quadratures integrate the |x_N| weight factor exactly per cell and the rest by
midpoint.  The energy is the interior-face sum, which for fields vanishing on
the boundary ring equals <L u, u> * cell volume identically.

File formats: "AWF1" (one text header line followed by little-endian float64
in i1,i2,i3 order with i3 fastest) and an interchangeable CSV variant with
header row i1,i2,i3,value.  Values round-trip bit-exactly in both.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .analytic import (
    FULL_SPACE,
    HALF_SPACE,
    HYPERPLANE,
    PUNCTURED,
    UNIT_BALL,
    AnalyticField,
)
from .errors import DomainMismatch, NoConvergence, WeightNotIntegrable
from .params import ProblemParams, derive_exponents, validate_params


@dataclass(frozen=True)
class GridSpec:
    """Cell-centered grid on [-L, L]^3 with even per-axis cell counts."""

    dims: Tuple[int, int, int]
    half_width: float

    def __post_init__(self):
        if len(self.dims) != 3:
            raise ValueError("gridded operators are fixed at three dimensions")
        for d in self.dims:
            if d < 2 or d % 2 != 0:
                raise ValueError(f"cell counts must be even and >= 2, got {self.dims}")
        if not self.half_width > 0:
            raise ValueError("half width must be positive")

    @property
    def spacing(self) -> Tuple[float, float, float]:
        return tuple(2.0 * self.half_width / d for d in self.dims)

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates -L + (k + 1/2) h along the given axis."""
        h = self.spacing[axis]
        return -self.half_width + (np.arange(self.dims[axis]) + 0.5) * h

    def cell_volume(self) -> float:
        h1, h2, h3 = self.spacing
        return h1 * h2 * h3

    def centers(self) -> np.ndarray:
        """All cell centers as an (n1*n2*n3, 3) array, i3 fastest."""
        x1, x2, x3 = (self.axis_coords(a) for a in range(3))
        g = np.meshgrid(x1, x2, x3, indexing="ij")
        return np.stack([a.ravel() for a in g], axis=1)


@dataclass(frozen=True)
class GridField:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.spec.dims:
            raise ValueError(f"values shape {self.values.shape} != dims {self.spec.dims}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid field contains non-finite entries")

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def zeros_like(spec: GridSpec) -> GridField:
    return GridField(spec, np.zeros(spec.dims))


# ---------------------------------------------------------------------------
# exact one-dimensional weight integrals
# ---------------------------------------------------------------------------

def _abs_pow_antiderivative(t: np.ndarray, e: float) -> np.ndarray:
    # antiderivative of |t|^e, valid for e > -1 across t = 0
    return np.sign(t) * np.abs(t) ** (e + 1.0) / (e + 1.0)


def interval_mean_abs_pow(a: np.ndarray, b: np.ndarray, e: float) -> np.ndarray:
    """Exact mean of |t|^e over [a, b] (e > -1)."""
    if e <= -1.0:
        raise WeightNotIntegrable(f"|t|^{e} is not locally integrable")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (_abs_pow_antiderivative(b, e) - _abs_pow_antiderivative(a, e)) / (b - a)


def _normal_face_weights(spec: GridSpec, alpha: float) -> np.ndarray:
    """Transmissibilities of the n3+1 faces normal to x_N: exact mean of
    |t|^(2a) over the interval between the adjacent cell centers."""
    n3 = spec.dims[2]
    h3 = spec.spacing[2]
    faces = -spec.half_width + np.arange(n3 + 1) * h3
    return interval_mean_abs_pow(faces - 0.5 * h3, faces + 0.5 * h3, 2.0 * alpha)


def _tangent_weights(spec: GridSpec, alpha: float) -> np.ndarray:
    """Cell-center weights |x_N|^(2a) shared by faces tangent to x_N."""
    return np.abs(spec.axis_coords(2)) ** (2.0 * alpha)


def _lp_cell_weights(spec: GridSpec, exponent: float) -> np.ndarray:
    """Exact per-cell means of |t|^exponent over each cell's x_N extent."""
    n3 = spec.dims[2]
    h3 = spec.spacing[2]
    lo = -spec.half_width + np.arange(n3) * h3
    return interval_mean_abs_pow(lo, lo + h3, exponent)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample(f: AnalyticField, spec: GridSpec) -> GridField:
    """Pointwise samples of an analytic field at the cell centers."""
    if f.domain == HYPERPLANE or f.dim != 3:
        raise DomainMismatch("cannot sample a hyperplane field on a 3-D grid")
    pts = spec.centers()
    if f.domain == HALF_SPACE and np.any(pts[:, 2] <= 0.0):
        raise DomainMismatch("half-space field sampled at nodes with x_N <= 0")
    if f.domain == UNIT_BALL and np.any(np.sum(pts * pts, axis=1) >= 1.0):
        raise DomainMismatch("unit-ball field sampled at nodes outside the ball")
    vals = f.evaluator(pts).reshape(spec.dims)
    if not np.all(np.isfinite(vals)):
        raise DomainMismatch("field evaluated to non-finite values on the grid")
    return GridField(spec, vals)


# ---------------------------------------------------------------------------
# the discrete operator and quadratures
# ---------------------------------------------------------------------------

def apply_L(u: GridField, p: ProblemParams) -> GridField:
    """Discrete -div(|x_N|^(2a) grad u) in flux form with zero-Dirichlet
    ghost values outside the box."""
    _require_grid_params(p)
    spec = u.spec
    h1, h2, h3 = spec.spacing
    v = u.values
    wt = _tangent_weights(spec, p.alpha)          # (n3,)
    wn = _normal_face_weights(spec, p.alpha)      # (n3+1,)

    out = np.zeros_like(v)

    # axis 0 and axis 1: both neighbors share the cell's x_N layer
    pad = np.pad(v, ((1, 1), (0, 0), (0, 0)))
    out += wt[None, None, :] * (2.0 * v - pad[:-2, :, :] - pad[2:, :, :]) / h1 ** 2
    pad = np.pad(v, ((0, 0), (1, 1), (0, 0)))
    out += wt[None, None, :] * (2.0 * v - pad[:, :-2, :] - pad[:, 2:, :]) / h2 ** 2

    # axis 2: per-face exact weights
    pad = np.pad(v, ((0, 0), (0, 0), (1, 1)))
    below = wn[None, None, :-1] * (v - pad[:, :, :-2])
    above = wn[None, None, 1:] * (v - pad[:, :, 2:])
    out += (below + above) / h3 ** 2

    return GridField(spec, out)


def grid_inner(a: GridField, b: GridField) -> float:
    """Plain grid inner product sum(a*b) (no volume factor)."""
    return float(np.sum(a.values * b.values))


def weighted_energy(u: GridField, p: ProblemParams) -> float:
    """Interior-face quadrature of the weighted gradient energy
    int |x_N|^(2a) |grad u|^2.

    Equals <L u, u> * cell volume exactly when u vanishes on the boundary
    ring (and for any compactly supported sample).
    """
    _require_grid_params(p)
    spec = u.spec
    h1, h2, h3 = spec.spacing
    v = u.values
    wt = _tangent_weights(spec, p.alpha)
    wn = _normal_face_weights(spec, p.alpha)
    vol = spec.cell_volume()

    d1 = v[1:, :, :] - v[:-1, :, :]
    e = float(np.sum(wt[None, None, :] * d1 * d1)) * vol / h1 ** 2
    d2 = v[:, 1:, :] - v[:, :-1, :]
    e += float(np.sum(wt[None, None, :] * d2 * d2)) * vol / h2 ** 2
    d3 = v[:, :, 1:] - v[:, :, :-1]
    e += float(np.sum(wn[None, None, 1:-1] * d3 * d3)) * vol / h3 ** 2
    return e


def dirichlet_energy(u: GridField, p: ProblemParams) -> float:
    """<L u, u> * cell volume: the interior-face energy plus the zero-ghost
    boundary-face penalty."""
    return grid_inner(apply_L(u, p), u) * u.spec.cell_volume()


def weighted_lp(u: GridField, p: ProblemParams) -> float:
    """Quadrature of int |x_N|^b |u|^pstar with the x_N weight integrated
    exactly per cell and |u|^pstar at cell centers."""
    _require_grid_params(p)
    e = derive_exponents(p)
    if not e.weight_b > -1.0:
        raise WeightNotIntegrable(f"weight exponent {e.weight_b} <= -1")
    wb = _lp_cell_weights(u.spec, e.weight_b)
    return float(np.sum(wb[None, None, :] * np.abs(u.values) ** e.pstar)) * u.spec.cell_volume()


def energy_J(u: GridField, p: ProblemParams) -> float:
    """The variational integral: half the weighted energy minus the critical
    term weighted by 1/pstar."""
    e = derive_exponents(p)
    return 0.5 * weighted_energy(u, p) - weighted_lp(u, p) / e.pstar


def _require_grid_params(p: ProblemParams) -> None:
    if p.N != 3:
        raise DomainMismatch("gridded operators are fixed at N = 3")


# ---------------------------------------------------------------------------
# boundary ring helpers and the Dirichlet solve
# ---------------------------------------------------------------------------

def ring_mask(spec: GridSpec) -> np.ndarray:
    m = np.zeros(spec.dims, dtype=bool)
    m[0, :, :] = m[-1, :, :] = True
    m[:, 0, :] = m[:, -1, :] = True
    m[:, :, 0] = m[:, :, -1] = True
    return m


def _diagonal_of_L(spec: GridSpec, p: ProblemParams) -> np.ndarray:
    h1, h2, h3 = spec.spacing
    wt = _tangent_weights(spec, p.alpha)
    wn = _normal_face_weights(spec, p.alpha)
    diag = 2.0 * wt * (1.0 / h1 ** 2 + 1.0 / h2 ** 2) + (wn[:-1] + wn[1:]) / h3 ** 2
    return np.broadcast_to(diag[None, None, :], spec.dims).copy()


def solve_dirichlet(
    g: GridField,
    f: GridField,
    p: ProblemParams,
    tol: float,
    max_iters: Optional[int] = None,
) -> GridField:
    """Solve L u = f with the boundary ring pinned to g (interior values of g
    are ignored) by Jacobi-preconditioned conjugate gradients.

    The iteration stops when ||L u - f|| <= tol * scale with scale taken from
    the effective right-hand side; the cap defaults to 10 * sqrt(#cells).
    """
    _require_grid_params(p)
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    spec = g.spec
    if f.spec != spec:
        raise DomainMismatch("source and boundary grids differ")
    ring = ring_mask(spec)
    inner = ~ring
    n_total = int(np.prod(spec.dims))
    cap = max_iters if max_iters is not None else int(10 * np.sqrt(n_total)) + 1

    u0 = np.where(ring, g.values, 0.0)
    b = f.values - apply_L(GridField(spec, u0), p).values
    b = np.where(inner, b, 0.0)

    def apply_inner(z: np.ndarray) -> np.ndarray:
        az = apply_L(GridField(spec, np.where(inner, z, 0.0)), p).values
        return np.where(inner, az, 0.0)

    scale = float(np.linalg.norm(b))
    z = np.zeros(spec.dims)
    if scale == 0.0:
        return GridField(spec, u0)

    diag = _diagonal_of_L(spec, p)
    r = b.copy()
    s = np.where(inner, r / diag, 0.0)
    d = s.copy()
    rs = float(np.sum(r * s))
    for _ in range(cap):
        if float(np.linalg.norm(r)) <= tol * scale:
            return GridField(spec, u0 + np.where(inner, z, 0.0))
        ad = apply_inner(d)
        denom = float(np.sum(d * ad))
        if denom <= 0.0:
            break
        step = rs / denom
        z = z + step * d
        r = r - step * ad
        s = np.where(inner, r / diag, 0.0)
        rs_new = float(np.sum(r * s))
        d = s + (rs_new / rs) * d
        rs = rs_new
    if float(np.linalg.norm(r)) <= tol * scale:
        return GridField(spec, u0 + np.where(inner, z, 0.0))
    raise NoConvergence(f"CG did not reach tol={tol} within {cap} iterations")


# ---------------------------------------------------------------------------
# AWF1 and CSV field files
# ---------------------------------------------------------------------------

_AWF1_MAGIC = b"AWF1 "


def write_awf1(path: str, field: GridField, p: ProblemParams) -> None:
    d1, d2, d3 = field.spec.dims
    header = (
        f"AWF1 N=3 dims={d1},{d2},{d3} L={field.spec.half_width!r} "
        f"alpha={p.alpha!r} s={p.s!r}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_awf1(path: str) -> tuple[GridField, ProblemParams]:
    with open(path, "rb") as fh:
        head = fh.readline()
        if not head.startswith(_AWF1_MAGIC):
            raise ValueError("not an AWF1 file: bad magic")
        tokens = head.decode("ascii").strip().split()
        kv = {}
        for tok in tokens[1:]:
            key, _, val = tok.partition("=")
            if not val:
                raise ValueError(f"malformed AWF1 header token {tok!r}")
            kv[key] = val
        try:
            dims = tuple(int(t) for t in kv["dims"].split(","))
            half_width = float(kv["L"])
            p = validate_params(int(kv["N"]), float(kv["alpha"]), float(kv["s"]))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed AWF1 header: {exc}") from exc
        spec = GridSpec(dims, half_width)
        raw = fh.read()
    n = int(np.prod(dims))
    vals = np.frombuffer(raw, dtype="<f8", count=n).reshape(dims)
    if vals.size != n:
        raise ValueError("AWF1 payload shorter than dims")
    return GridField(spec, vals.copy()), p


def write_csv(path: str, field: GridField) -> None:
    d1, d2, d3 = field.spec.dims
    buf = io.StringIO()
    buf.write("i1,i2,i3,value\r\n")
    v = field.values
    for i1 in range(d1):
        for i2 in range(d2):
            for i3 in range(d3):
                buf.write(f"{i1},{i2},{i3},{v[i1, i2, i3]!r}\r\n")
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str, half_width: float) -> GridField:
    """Read the CSV variant; geometry (L) is not stored in the file and must
    be supplied by the caller."""
    rows = []
    with open(path, "r", newline="") as fh:
        header = fh.readline().strip().rstrip("\r")
        if header != "i1,i2,i3,value":
            raise ValueError(f"bad CSV header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            i1, i2, i3, val = line.split(",")
            rows.append((int(i1), int(i2), int(i3), float(val)))
    if not rows:
        raise ValueError("empty CSV field file")
    dims = tuple(max(r[a] for r in rows) + 1 for a in range(3))
    vals = np.full(dims, np.nan)
    for i1, i2, i3, val in rows:
        vals[i1, i2, i3] = val
    if not np.all(np.isfinite(vals)):
        raise ValueError("CSV field file does not cover every cell")
    return GridField(GridSpec(dims, half_width), vals)


def read_field(path: str, half_width: Optional[float] = None):
    """Dispatch on content: AWF1 returns (field, params); CSV returns
    (field, None) and needs half_width."""
    with open(path, "rb") as fh:
        magic = fh.read(5)
    if magic == _AWF1_MAGIC:
        return read_awf1(path)
    if half_width is None:
        raise ValueError("CSV field files need an explicit half width (L)")
    return read_csv(path, half_width), None
