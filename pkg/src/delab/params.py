"""Problem parameters and the exponents derived from them.

The equation family is parameterized by the dimension N >= 3, the weight
exponent alpha > 1/2 of the degenerate coefficient |x_N|^(2*alpha), and the
Hardy exponent 0 <= s <= 2.  Everything else is exponent algebra:

    pstar        = 2(N - s)/(N - 2)        critical Hardy-Sobolev power
    weight_a     = 2*alpha                 gradient-side weight exponent
    weight_b     = alpha*pstar - s         nonlinearity-side weight exponent
    decay_d      = N - 2 + 2*alpha         decay rate of entire solutions,
                                           also the inversion power
    hardy_lambda = -alpha*(alpha - 1)      coefficient after u -> x_N^alpha u
    tau          = (2*alpha - 1)/floor(2*alpha)
    k_dim        = floor(2*alpha) + 2      dimension of the reduced radial ODE
    beta         = weight_b - weight_a
    sigma_exp    = (beta - 2*(tau - 1))/tau

Endcases: s = 2 gives pstar = 2 and is accepted here, but operations whose
conclusions require s < 2 re-validate via `require_subcritical_s`.
All arithmetic is double precision; invariant checks use 1e-12 absolute.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AlphaOutOfRange, DimensionTooSmall, SOutOfRange


@dataclass(frozen=True)
class ProblemParams:
    """Validated parameter triple (N, alpha, s)."""

    N: int
    alpha: float
    s: float


@dataclass(frozen=True)
class DerivedExponents:
    pstar: float
    weight_a: float
    weight_b: float
    decay_d: float
    hardy_lambda: float
    tau: float
    k_dim: int
    beta: float
    sigma_exp: float


def validate_params(N, alpha, s) -> ProblemParams:
    """Validate (N, alpha, s) and return the frozen parameter record.

    Raises DimensionTooSmall for N < 3 (or non-integer N), AlphaOutOfRange for
    alpha <= 1/2, SOutOfRange for s outside [0, 2].
    """
    n_int = int(N)
    if n_int != N:
        raise DimensionTooSmall(f"dimension must be an integer, got {N!r}")
    if n_int < 3:
        raise DimensionTooSmall(f"dimension must be >= 3, got {n_int}")
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.5:
        raise AlphaOutOfRange(f"alpha must be > 1/2, got {alpha!r}")
    s = float(s)
    if not math.isfinite(s) or s < 0.0 or s > 2.0:
        raise SOutOfRange(f"s must lie in [0, 2], got {s!r}")
    return ProblemParams(N=n_int, alpha=alpha, s=s)


def require_subcritical_s(p: ProblemParams, where: str = "") -> None:
    """Reject s = 2 for operations whose conclusions assume s < 2."""
    if p.s >= 2.0:
        raise SOutOfRange(f"s < 2 required{' by ' + where if where else ''}, got s={p.s}")


def derive_exponents(p: ProblemParams) -> DerivedExponents:
    """Compute every derived exponent for validated parameters."""
    N, alpha, s = p.N, p.alpha, p.s
    pstar = 2.0 * (N - s) / (N - 2.0)
    weight_a = 2.0 * alpha
    weight_b = alpha * pstar - s
    decay_d = N - 2.0 + 2.0 * alpha
    hardy_lambda = -alpha * (alpha - 1.0)
    floor2a = math.floor(2.0 * alpha)
    tau = (2.0 * alpha - 1.0) / floor2a
    k_dim = floor2a + 2
    beta = weight_b - weight_a
    sigma_exp = (beta - 2.0 * (tau - 1.0)) / tau
    return DerivedExponents(
        pstar=pstar,
        weight_a=weight_a,
        weight_b=weight_b,
        decay_d=decay_d,
        hardy_lambda=hardy_lambda,
        tau=tau,
        k_dim=k_dim,
        beta=beta,
        sigma_exp=sigma_exp,
    )


def in_explicit_regime(p: ProblemParams, s_tol: float = 1e-6) -> bool:
    """True when (alpha, s) sits at the explicitly solvable point alpha = 1,
    s = 1 + 2/N.

    The s comparison is absolute with tolerance `s_tol` so that truncated
    decimal spellings of 1 + 2/N (for example 1.6666667 at N = 3) are
    accepted; the closed-form solution itself only uses N.
    """
    return abs(p.alpha - 1.0) <= 1e-9 and abs(p.s - (1.0 + 2.0 / p.N)) <= s_tol
