"""Exact evaluation of Q * min_{n<=Q} prod_i ||n x_i|| and its certified variants."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ratcore import RatInterval, ScaledInterval, as_rational, rat_str
from .stepfn import StepFunctionSpec

MAX_COMPONENTS = 4


@dataclass(frozen=True)
class MinResult:
    """``min_{1<=n<=N} prod_i ||n x_i||`` together with its first minimizer."""

    value: Fraction
    argmin: int


def _check(items, Q: int):
    if not 1 <= len(items) <= MAX_COMPONENTS:
        raise ValueError(f"need 1..{MAX_COMPONENTS} components, got {len(items)}")
    if Q < 1:
        raise ValueError("Q must be positive")


def _point_scaled(x: Fraction) -> tuple[int, int]:
    return x.numerator % x.denominator, x.denominator


def min_product(xs, N: int) -> MinResult:
    """Exact minimum over ``1 <= n <= N`` of ``prod ||n x_i||`` at rational points."""
    xs = [as_rational(x) for x in xs]
    _check(xs, N)
    comps = [_point_scaled(x) for x in xs]
    den = 1
    for _, b in comps:
        den *= b
    best, arg = None, 1
    for n in range(1, N + 1):
        num = 1
        for a, b in comps:
            r = n * a % b
            num *= min(r, b - r)
            if num == 0:
                break
        if best is None or num < best:
            best, arg = num, n
            if num == 0:
                break
    return MinResult(Fraction(best, den), arg)


def min_product_lower(enclosures, N: int) -> MinResult:
    """Exact ``min_n prod_i inf_{x in X_i} ||n x||`` over a rectangle."""
    _check(enclosures, N)
    comps = [ScaledInterval(X) for X in enclosures]
    den = 1
    for c in comps:
        den *= c.d
    best, arg = None, 1
    for n in range(1, N + 1):
        num = 1
        for c in comps:
            num *= c.lower_num(n)
            if num == 0:
                break
        if best is None or num < best:
            best, arg = num, n
            if num == 0:
                break
    return MinResult(Fraction(best, den), arg)


def dmin(xs, Q: int) -> Fraction:
    """``Q * min_{1<=n<=Q} prod_i ||n x_i||`` exactly."""
    return Q * min_product(xs, Q).value


def dmin_lower(enclosures, Q: int) -> Fraction:
    """Lower bound for :func:`dmin` valid at every point of the rectangle."""
    return Q * min_product_lower([_as_interval(X) for X in enclosures], Q).value


def weighted_min(xs, Q: int, psi: StepFunctionSpec) -> Fraction:
    """``(Q / Psi(Q)) * min_{1<=n<=Q} prod_i ||n x_i||``."""
    w = psi(Q)
    if w <= 0:
        raise ValueError("Psi(Q) must be positive")
    return Q / w * min_product(xs, Q).value


def _as_interval(X) -> RatInterval:
    if isinstance(X, RatInterval):
        return X
    return RatInterval.point(X)


def profile(items, Q_list, enclosures: bool = False) -> list[tuple[int, Fraction]]:
    """Values at each Q of an ascending list, reusing the running minimum."""
    Q_list = list(Q_list)
    if any(a >= b for a, b in zip(Q_list, Q_list[1:])):
        raise ValueError("Q_list must be strictly ascending")
    if enclosures:
        comps = [ScaledInterval(_as_interval(X)) for X in items]
    else:
        comps = [ScaledInterval(RatInterval.point(as_rational(x))) for x in items]
    _check(comps, Q_list[0] if Q_list else 1)
    den = 1
    for c in comps:
        den *= c.d
    out = []
    best = None
    n = 0
    for Q in Q_list:
        while n < Q and best != 0:
            n += 1
            num = 1
            for c in comps:
                num *= c.lower_num(n)
            if best is None or num < best:
                best = num
        out.append((Q, Q * Fraction(best, den)))
    return out


def profile_json(rows) -> list[dict]:
    return [{"Q": Q, "value": rat_str(v), "value_approx": float(v)} for Q, v in rows]
