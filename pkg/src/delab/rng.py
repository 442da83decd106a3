"""Deterministic random draws from a documented 64-bit linear congruential
generator.

State update:  x <- (A*x + C) mod 2^64  with the MMIX constants

    A = 6364136223846793005
    C = 1442695040888963407

Doubles come from the top 53 bits: u = (x >> 11) * 2^-53, so every sequence is
reproducible across platforms and implementations from the seed alone.  All
randomized checks in the library and the CLI draw from this generator.
"""

from __future__ import annotations

import numpy as np

_A = 6364136223846793005
_C = 1442695040888963407
_M = 1 << 64


class Lcg64:
    def __init__(self, seed: int = 42):
        self.state = seed % _M

    def next_u64(self) -> int:
        self.state = (_A * self.state + _C) % _M
        return self.state

    def u01(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.u01()

    def point_in_box(self, half_width: float, dim: int = 3) -> np.ndarray:
        return np.array([self.uniform(-half_width, half_width) for _ in range(dim)])

    def point_on_sphere(self, radius: float = 1.0, dim: int = 3) -> np.ndarray:
        """Uniform point on the sphere of the given radius (rejection from the
        unit ball, then projection)."""
        while True:
            x = np.array([self.uniform(-1.0, 1.0) for _ in range(dim)])
            n2 = float(x @ x)
            if 1e-8 < n2 <= 1.0:
                return radius * x / np.sqrt(n2)

    def point_in_annulus(
        self,
        r_min: float,
        r_max: float,
        xn_min: float = 0.0,
        dim: int = 3,
    ) -> np.ndarray:
        """Uniform point with r_min < |x| < r_max and |x_N| > xn_min."""
        while True:
            x = np.array([self.uniform(-r_max, r_max) for _ in range(dim)])
            r = float(np.sqrt(x @ x))
            if r_min < r < r_max and abs(x[-1]) > xn_min:
                return x
