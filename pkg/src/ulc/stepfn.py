"""Rational-valued step functions on the positive integers (the weights Phi, Psi)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .ratcore import as_rational

KINDS = ("constant", "power", "root", "log", "reciprocal_log", "table")


@dataclass(frozen=True)
class StepFunctionSpec:
    """A weight function ``t -> value`` with exact rational values.

    ``constant:c``        c
    ``power:k``           t**k for an integer k (negative k gives t**-|k|)
    ``root:k``            floor(t**(1/k))
    ``log``               floor(log2(t+1))
    ``reciprocal_log``    1/floor(log2(t+1))
    ``table:v1,v2,...``   v_t for t <= len, then the last value
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown step function kind {self.kind!r}")
        if self.kind == "constant":
            (c,) = self.params
            if as_rational(c) <= 0:
                raise ValueError("constant must be positive")
        elif self.kind in ("power", "root"):
            (k,) = self.params
            if not isinstance(k, int) or (self.kind == "root" and k < 1):
                raise ValueError(f"{self.kind} needs an integer parameter")
        elif self.kind == "table":
            if not self.params or any(as_rational(v) <= 0 for v in self.params):
                raise ValueError("table values must be positive")

    # construction helpers
    @classmethod
    def parse(cls, text: str) -> "StepFunctionSpec":
        aliases = {"one": "constant:1", "id": "power:1", "sqrt": "root:2"}
        text = aliases.get(text.strip(), text.strip())
        kind, _, rest = text.partition(":")
        if kind == "constant":
            return cls(kind, (as_rational(rest),))
        if kind in ("power", "root"):
            return cls(kind, (int(rest),))
        if kind == "table":
            return cls(kind, tuple(as_rational(v) for v in rest.split(",")))
        return cls(kind)

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant:{as_rational(self.params[0])}"
        if self.kind in ("power", "root"):
            return f"{self.kind}:{self.params[0]}"
        if self.kind == "table":
            return "table:" + ",".join(str(as_rational(v)) for v in self.params)
        return self.kind

    def __call__(self, t: int) -> Fraction:
        if t < 1:
            raise ValueError("step functions are defined on positive integers")
        k = self.kind
        if k == "constant":
            return as_rational(self.params[0])
        if k == "power":
            e = self.params[0]
            return Fraction(t) ** e
        if k == "root":
            return Fraction(_iroot(t, self.params[0]))
        if k == "log":
            return Fraction((t + 1).bit_length() - 1)
        if k == "reciprocal_log":
            return Fraction(1, (t + 1).bit_length() - 1)
        vals = self.params
        return as_rational(vals[min(t, len(vals)) - 1])

    @property
    def nondecreasing(self) -> bool:
        if self.kind in ("constant", "root", "log"):
            return True
        if self.kind == "power":
            return self.params[0] >= 0
        if self.kind == "reciprocal_log":
            return False
        vals = [as_rational(v) for v in self.params]
        return all(a <= b for a, b in zip(vals, vals[1:]))

    @property
    def nonincreasing(self) -> bool:
        if self.kind in ("constant", "reciprocal_log"):
            return True
        if self.kind == "power":
            return self.params[0] <= 0
        if self.kind in ("root", "log"):
            return False
        vals = [as_rational(v) for v in self.params]
        return all(a >= b for a, b in zip(vals, vals[1:]))

    @property
    def unbounded(self) -> bool:
        if self.kind == "power":
            return self.params[0] > 0
        return self.kind in ("root", "log")

    def inverse(self, x, cutoff: int = 1 << 200) -> int:
        """Smallest t >= 1 with Phi(y) >= x for every y >= t.

        Only defined for nondecreasing specs, where this is min{t : Phi(t) >= x}.
        """
        if not self.nondecreasing:
            raise ValueError(f"{self.describe()} is not nondecreasing")
        x = as_rational(x)
        if self(1) >= x:
            return 1
        hi = 2
        while self(hi) < x:
            hi *= 2
            if hi > cutoff:
                raise ValueError(f"{self.describe()} never reaches {x} below {cutoff}")
        lo = hi // 2  # self(lo) < x <= self(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self(mid) >= x:
                hi = mid
            else:
                lo = mid
        return hi


def _iroot(t: int, k: int) -> int:
    """floor(t**(1/k)) for positive integers."""
    if k == 1:
        return t
    if k == 2:
        return math.isqrt(t)
    # integer Newton iteration from an overestimate
    r = 1 << -(-t.bit_length() // k)
    while True:
        nxt = ((k - 1) * r + t // r ** (k - 1)) // k
        if nxt >= r:
            return r
        r = nxt


ONE = StepFunctionSpec("constant", (Fraction(1),))
IDENTITY = StepFunctionSpec("power", (1,))
