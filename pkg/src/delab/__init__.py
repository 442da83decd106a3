"""delab: a numerical laboratory for the degenerate anisotropic critical equation.

The library studies -div(|x_N|^(2a) grad u) = K |x_N|^(a*p-s) |u|^(p-2) u with
p = 2(N-s)/(N-2): exponent algebra, closed-form solutions and their transforms,
a weight-exact finite-difference operator on cell-centered grids, Pohozaev-type
sphere identities, and a Rayleigh-quotient descent for the best constant of the
associated weighted Sobolev inequality.

Kept import-light on purpose: the CLI sets thread environment variables before
the numerical modules pull in numpy.
"""

__version__ = "0.1.0"

__all__ = [
    "params",
    "analytic",
    "xforms",
    "wgrid",
    "identities",
    "varmin",
    "probes",
    "rng",
    "errors",
]
