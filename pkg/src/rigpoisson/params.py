"""Model parameters of G(n, m, p) with m = floor(n^alpha)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property


def as_fraction(value) -> Fraction:
    """Parse an exact rational: Fraction, int, or a string like "3/2" or "0.25"."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a rational number: {value!r}") from None
    if isinstance(value, float):
        # floats are accepted only when they are short decimals such as 0.5
        return Fraction(repr(value))
    raise TypeError(f"cannot interpret {value!r} as a rational")


def _iroot(t: int, b: int) -> int:
    """floor(t ** (1/b)) for integers, by Newton's method from above."""
    if t < 2:
        return t
    x = 1 << -(-t.bit_length() // b)
    while True:
        y = ((b - 1) * x + t // x ** (b - 1)) // b
        if y >= x:
            return x
        x = y


def floor_power(n: int, alpha) -> int:
    """floor(n ** alpha) computed exactly for rational alpha."""
    alpha = as_fraction(alpha)
    if n < 1:
        raise ValueError("n must be positive")
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    return _iroot(n ** alpha.numerator, alpha.denominator)


@dataclass(frozen=True)
class ModelParams:
    """n, alpha, p (and optionally the c, eta that produced p = c n^-eta)."""

    n: int
    alpha: Fraction
    p: float
    c: float | None = None
    eta: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not (0 < self.p <= 1):
            raise ValueError(f"p = {self.p} outside (0, 1]")
        if self.m < 1:
            raise ValueError("m = floor(n^alpha) must be at least 1")

    @classmethod
    def at_threshold(cls, n: int, alpha, c: float, eta) -> "ModelParams":
        eta = as_fraction(eta)
        if c <= 0:
            raise ValueError("c must be positive")
        p = c * math.exp(-float(eta) * math.log(n))
        return cls(n, as_fraction(alpha), p, float(c), eta)

    @cached_property
    def m(self) -> int:
        return floor_power(self.n, self.alpha)
