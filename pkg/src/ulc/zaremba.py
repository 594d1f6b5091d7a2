"""F_m membership, Zaremba numerators, prime sieving and density reports."""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._parallel import pmap
from .ratcore import as_rational, cf_expand, non_canonical_twin

# Informational only; never used inside a certificate.
KNOWN_DELTA = {
    2: ("0.53", "lower bound for dim_H(F_2)"),
    50: ("307/312", "dimension threshold the effective Zaremba density result needs"),
}


@dataclass(frozen=True)
class ZarembaParams:
    m: int
    delta: Fraction | None = None
    sigma: Fraction | None = None

    @classmethod
    def from_delta(cls, m: int, delta) -> "ZarembaParams":
        delta = as_rational(delta)
        return cls(m, delta, 2 * delta - Fraction("1.001"))


@dataclass(frozen=True)
class ZarembaSet:
    q: int
    m: int
    numerators: tuple[int, ...]

    def __len__(self):
        return len(self.numerators)

    def __contains__(self, u):
        i = bisect_left(self.numerators, u)
        return i < len(self.numerators) and self.numerators[i] == u


def _fm_int(u: int, q: int, m: int) -> bool:
    """Whether u/q (0 < u < q) has a finite expansion with all quotients <= m.

    The twin expansion only changes the last quotient a -> (a-1, 1), so
    the test is: every quotient <= m except the last, which may be m+1.
    """
    a, b = q, u
    while True:
        t, r = divmod(a, b)
        if r == 0:
            return t <= m + 1
        if t > m:
            return False
        a, b = b, r


def is_Fm(x, m: int) -> bool:
    x = as_rational(x)
    if not 0 < x < 1:
        raise ValueError(f"F_m membership needs 0 < x < 1, got {x}")
    if m < 1:
        raise ValueError("m must be positive")
    w = cf_expand(x)
    if max(w.quotients) <= m:
        return True
    return max(non_canonical_twin(w).quotients) <= m


def _numerators_scan(q: int, m: int) -> list[int]:
    return [u for u in range(1, q) if math.gcd(u, q) == 1 and _fm_int(u, q, m)]


def _word_ok(d: int, c: int, m: int) -> bool:
    """d/c (0 < d < c, coprime) has quotients <= m except a last one <= m+1."""
    a, b = c, d
    while True:
        t, r = divmod(a, b)
        if r == 0:
            return b == 1 and t <= m + 1
        if t > m:
            return False
        a, b = b, r


def _numerators_split(q: int, m: int) -> list[int]:
    # u/q = [0; w] and M(w) = prod [[a,1],[1,0]] = [[q, .], [u, .]].
    # Split w = w1 w2 at the first prefix whose continuant reaches T; then
    # q = A*C + B*D, u = A'*C + B'*D with (C, D) = (K(w2), K(w2 minus first)).
    # Only the very last quotient of w may be m+1.
    T = max(2, math.isqrt(q))
    found = set()
    stack = [(1, 0, 0, 1)]
    while stack:
        A0, B0, Ap0, Bp0 = stack.pop()
        if (m + 1) * A0 + B0 == q:
            found.add((m + 1) * Ap0 + Bp0)
        for a in range(1, m + 1):
            A, B, Ap, Bp = a * A0 + B0, A0, a * Ap0 + Bp0, Ap0
            if A > q:
                break
            if A < T:
                stack.append((A, B, Ap, Bp))
                continue
            if A == q:
                found.add(Ap)
                continue
            d_max = q // (A + B)
            if d_max < 1:
                continue
            d = (q * pow(B, -1, A)) % A or A
            while d <= d_max:
                c, rem = divmod(q - B * d, A)
                if rem == 0 and c > d and _word_ok(d, c, m):
                    found.add(Ap * c + Bp * d)
                d += A
    return sorted(u for u in found if 0 < u < q)


@lru_cache(maxsize=4096)
def _numerators_cached(q: int, m: int, method: str) -> tuple[int, ...]:
    if method == "auto":
        method = "scan" if q <= 64 else "split"
    if method == "scan":
        return tuple(_numerators_scan(q, m))
    if method == "split":
        return tuple(_numerators_split(q, m))
    raise ValueError(f"unknown method {method!r}")


def zaremba_numerators(q: int, m: int, method: str = "auto") -> ZarembaSet:
    """All u in [1, q-1] coprime to q with u/q in F_m."""
    if q < 2 or m < 1:
        raise ValueError("need q >= 2 and m >= 1")
    return ZarembaSet(q, m, _numerators_cached(q, m, method))


# -- primes -----------------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (valid far beyond 64-bit range)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _small_primes(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


def sieve_primes(lo: int, hi: int, segment: int = 1 << 20) -> list[int]:
    """Primes in [lo, hi] by a segmented sieve of Eratosthenes."""
    if not 2 <= lo <= hi:
        raise ValueError("need 2 <= lo <= hi")
    base = _small_primes(math.isqrt(hi))
    out: list[int] = []
    for start in range(lo, hi + 1, segment):
        stop = min(start + segment, hi + 1)
        mark = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            first = max(p * p, -(-start // p) * p)
            if first >= stop:
                continue
            mark[first - start :: p] = False
        out.extend((np.flatnonzero(mark) + start).tolist())
    return out


# -- density report ----------------------------------------------------------

def _meets_power(card: int, q: int, sigma: Fraction) -> bool:
    # card >= q**sigma, exactly, for rational sigma >= 0
    return card ** sigma.denominator >= q ** sigma.numerator


def _card_task(args):
    q, m = args
    return len(zaremba_numerators(q, m))


@dataclass
class DensityReport:
    T: int
    gamma: Fraction
    m: int
    sigma: Fraction
    rows: list[tuple[int, int, bool]] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.rows)

    @property
    def passed(self) -> int:
        return sum(1 for _, _, ok in self.rows if ok)

    @property
    def density(self) -> Fraction:
        return Fraction(self.passed, self.count) if self.rows else Fraction(0)

    def summary(self) -> dict:
        cards = [c for _, c, _ in self.rows]
        return {
            "count": self.count,
            "passed": self.passed,
            "min_card": min(cards) if cards else None,
            "max_card": max(cards) if cards else None,
            "mean_card_approx": float(np.mean(cards)) if cards else None,
            "exceptions": [q for q, _, ok in self.rows if not ok],
        }

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "gamma": f"{self.gamma.numerator}/{self.gamma.denominator}",
            "m": self.m,
            "sigma": f"{self.sigma.numerator}/{self.sigma.denominator}",
            "primes": [{"q": q, "card": c, "pass": ok} for q, c, ok in self.rows],
            "density": f"{self.density.numerator}/{self.density.denominator}",
            "density_approx": float(self.density),
            "summary": self.summary(),
        }

    def csv_rows(self) -> list[list]:
        return [["q", "card", "pass"]] + [[q, c, int(ok)] for q, c, ok in self.rows]


def density_report(T: int, gamma, m: int, sigma, threads: int = 1) -> DensityReport:
    """|M_q| against q^sigma for every prime q in [gamma*T, T]."""
    gamma, sigma = as_rational(gamma), as_rational(sigma)
    if T < 10 or not 0 < gamma < 1:
        raise ValueError("need T >= 10 and 0 < gamma < 1")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    lo = max(2, math.ceil(gamma * T))
    primes = sieve_primes(lo, T) if lo <= T else []
    cards = pmap(_card_task, [(q, m) for q in primes], threads)
    rows = [(q, c, _meets_power(c, q, sigma)) for q, c in zip(primes, cards)]
    return DensityReport(T, gamma, m, sigma, rows)
