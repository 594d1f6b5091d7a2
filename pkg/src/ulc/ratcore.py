"""Exact rationals, closed rational intervals and finite continued fractions.

Rationals are :class:`fractions.Fraction` throughout; it already keeps
lowest terms with a positive denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

Rational = Fraction


def as_rational(x) -> Fraction:
    """Parse ``int``, ``Fraction`` or an exact string ("a/b", "3", "0.25")."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"refusing inexact value {x!r}; pass an int, Fraction or string")


def rat_str(x: Fraction) -> str:
    """Serialize as "num/den" (integers keep the "/1")."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "RatInterval":
        x = as_rational(x)
        return cls(x, x)

    @classmethod
    def parse(cls, text: str) -> "RatInterval":
        """Parse "lo:hi" or "[lo,hi]"."""
        t = text.strip().lstrip("[").rstrip("]")
        sep = ":" if ":" in t else ","
        lo, hi = t.split(sep)
        return cls(as_rational(lo), as_rational(hi))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "RatInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_contains(self, other: "RatInterval") -> bool:
        """``other`` is a subset and not equal."""
        return self.contains_interval(other) and (self.lo, self.hi) != (other.lo, other.hi)

    def scale(self, n: int) -> "RatInterval":
        a, b = n * self.lo, n * self.hi
        return RatInterval(min(a, b), max(a, b))

    def to_json(self) -> str:
        return f"[{rat_str(self.lo)},{rat_str(self.hi)}]"

    def __str__(self) -> str:
        return self.to_json()


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


@dataclass(frozen=True)
class CFWord:
    """Finite continued fraction ``[integer_part; quotients...]``."""

    integer_part: int
    quotients: tuple[int, ...] = ()

    def __post_init__(self):
        qs = tuple(int(a) for a in self.quotients)
        if any(a < 1 for a in qs):
            raise ValueError(f"partial quotients must be positive: {qs}")
        object.__setattr__(self, "quotients", qs)
        object.__setattr__(self, "integer_part", int(self.integer_part))

    @property
    def canonical(self) -> bool:
        return len(self.quotients) <= 1 or self.quotients[-1] >= 2

    def as_list(self) -> list[int]:
        return [self.integer_part, *self.quotients]

    def __str__(self) -> str:
        return f"[{self.integer_part}; {','.join(map(str, self.quotients))}]"


def cf_expand(x) -> CFWord:
    """Canonical expansion of a rational by the Euclidean algorithm."""
    x = as_rational(x)
    a, b = x.numerator, x.denominator
    head, a = divmod(a, b)
    qs = []
    while a:
        b, (t, a) = a, divmod(b, a)
        qs.append(t)
    return CFWord(head, tuple(qs))


def cf_value(w: CFWord) -> Fraction:
    value = None
    for a in reversed(w.quotients):
        value = Fraction(a) if value is None else a + 1 / value
    if value is None:
        return Fraction(w.integer_part)
    return w.integer_part + 1 / value


def non_canonical_twin(w: CFWord) -> CFWord:
    """The other finite expansion of the same rational.

    ``[.., a]`` with ``a >= 2`` becomes ``[.., a-1, 1]``; ``[.., a, 1]``
    folds back to ``[.., a+1]``.  For an integer ``n`` the twin is
    ``[n-1; 1]``.
    """
    qs = list(w.quotients)
    if not qs:
        return CFWord(w.integer_part - 1, (1,))
    if qs[-1] >= 2:
        return CFWord(w.integer_part, (*qs[:-1], qs[-1] - 1, 1))
    if len(qs) == 1:
        return CFWord(w.integer_part + 1, ())
    return CFWord(w.integer_part, (*qs[:-2], qs[-2] + 1))


def convergents(w: CFWord) -> list[tuple[int, int]]:
    """All convergents ``(p_k, q_k)`` including the integer part."""
    p_prev, q_prev = 1, 0
    p, q = w.integer_part, 1
    out = [(p, q)]
    for a in w.quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


def convergent_quality_violations(x) -> list[int]:
    """Indices k where (a_(k+1)+2)^-1 q_k^-1 <= |q_k x - p_k| fails (canonical word of x)."""
    x = as_rational(x)
    w = cf_expand(x)
    conv = convergents(w)
    return [
        k for k, a in enumerate(w.quotients)
        if abs(conv[k][1] * x - conv[k][0]) * (a + 2) * conv[k][1] < 1
    ]


def nearest_dist(x) -> Fraction:
    x = as_rational(x)
    r = x - _floor(x)
    return min(r, 1 - r)


def _ndl_scaled(a: int, b: int, d: int, n: int) -> int:
    """Numerator over ``d`` of inf ||n*x|| for x in [a/d, b/d]."""
    lo, hi = n * a, n * b
    if lo // d != hi // d or lo % d == 0:
        return 0
    r_lo, r_hi = lo % d, hi % d
    return min(r_lo, d - r_lo, r_hi, d - r_hi)


def nearest_dist_lower(X: RatInterval, n: int) -> Fraction:
    """Exact ``inf_{x in X} ||n x||``.

    Between two integers ``||.||`` is a tent, so the infimum over an
    integer-free image is attained at an endpoint.
    """
    if n < 1:
        raise ValueError("n must be positive")
    d = math.lcm(X.lo.denominator, X.hi.denominator)
    a = X.lo.numerator * (d // X.lo.denominator)
    b = X.hi.numerator * (d // X.hi.denominator)
    return Fraction(_ndl_scaled(a, b, d, n), d)


def nearest_dist_upper(X: RatInterval, n: int) -> Fraction:
    """Exact ``sup_{x in X} ||n x||``."""
    lo, hi = n * X.lo, n * X.hi
    # smallest half-integer >= lo
    half = -_floor(Fraction(1, 2) - lo) + Fraction(1, 2)
    if half <= hi:
        return Fraction(1, 2)
    return max(nearest_dist(lo), nearest_dist(hi))


class ScaledInterval:
    """``X`` rewritten as ``[a/d, b/d]`` for fast repeated ``||n x||`` bounds."""

    __slots__ = ("a", "b", "d")

    def __init__(self, X: RatInterval):
        self.d = math.lcm(X.lo.denominator, X.hi.denominator)
        self.a = X.lo.numerator * (self.d // X.lo.denominator)
        self.b = X.hi.numerator * (self.d // X.hi.denominator)

    def lower_num(self, n: int) -> int:
        return _ndl_scaled(self.a, self.b, self.d, n)


def farey_neighbors(x: Fraction, N: int) -> tuple[Fraction, Fraction] | None:
    """Neighbours ``a/b < x < c/d`` of ``x`` in the Farey sequence of order ``N``.

    Returns ``None`` when ``x`` itself has denominator ``<= N``.
    """
    if x.denominator <= N:
        return None
    cv = convergents(cf_expand(x))
    j = max(i for i, (_, q) in enumerate(cv) if q <= N)
    p_j, q_j = cv[j]
    p_prev, q_prev = cv[j - 1] if j > 0 else (1, 0)
    t = (N - q_prev) // q_j
    mediant = Fraction(p_prev + t * p_j, q_prev + t * q_j)
    conv = Fraction(p_j, q_j)
    return (conv, mediant) if conv < x else (mediant, conv)


def min_dist_upto(X: RatInterval, N: int) -> Fraction:
    """Exact ``inf_{x in X} min_{1<=n<=N} ||n x||``.

    If ``X`` avoids every fraction of denominator ``<= N`` it sits between
    two Farey neighbours ``a/b < X < c/d``; unimodularity of ``(b,a),(d,c)``
    then pins the minimum to ``min(b*lo - a, c - d*hi)``.
    """
    return min_dist_upto_arg(X, N)[0]


def min_dist_upto_arg(X: RatInterval, N: int) -> tuple[Fraction, int]:
    """:func:`min_dist_upto` together with an ``n`` attaining it."""
    if N < 1:
        raise ValueError("N must be positive")
    nb = farey_neighbors(X.lo, N)
    if nb is None:
        return Fraction(0), X.lo.denominator
    left, right = nb
    if X.hi >= right:
        return Fraction(0), right.denominator
    vl = left.denominator * X.lo - left.numerator
    vr = right.numerator - right.denominator * X.hi
    if (vl, left.denominator) <= (vr, right.denominator):
        return vl, left.denominator
    return vr, right.denominator


def simplest_in(lo: Fraction, hi: Fraction) -> Fraction:
    """Fraction of least denominator in the closed interval ``[lo, hi]``."""
    if lo > hi:
        raise ValueError("empty interval")
    fl = _floor(lo)
    if lo == fl:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    inner = simplest_in(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / inner
