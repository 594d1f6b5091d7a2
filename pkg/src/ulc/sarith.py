"""S-norms and the S-arithmetic constructions.

|q|_S = prod_{p in S} |q|_p.  Three quantities of the form
Q * min_{0<s<=Q} ||s xi|| |s|_S are handled:

* S = {p}: xi close to u/p^a with p not dividing u gives values in [1-2beta, 1];
* finite S, base prime outside S: a twisted window around p/base^a keeps the
  value >= 1/3 after scaling by Phi(Q);
* S with a single excluded prime: the value decays for every xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cfnum import CFNumber
from .ratcore import (RatInterval, ScaledInterval, min_dist_upto_arg, nearest_dist_lower,
                      nearest_dist_upper, rat_str)
from .stepfn import StepFunctionSpec
from .zaremba import is_prime


@dataclass(frozen=True)
class SSpec:
    kind: str  # "include" or "exclude"
    primes: tuple[int, ...]

    def __post_init__(self):
        ps = tuple(int(p) for p in self.primes)
        if self.kind not in ("include", "exclude"):
            raise ValueError(f"unknown S kind {self.kind!r}")
        if len(set(ps)) != len(ps) or not all(is_prime(p) for p in ps):
            raise ValueError(f"S must list distinct primes, got {ps}")
        if self.kind == "include" and not ps:
            raise ValueError("an include list must be nonempty")
        object.__setattr__(self, "primes", tuple(sorted(ps)))

    @classmethod
    def include(cls, *primes) -> "SSpec":
        return cls("include", primes)

    @classmethod
    def exclude(cls, *primes) -> "SSpec":
        return cls("exclude", primes)

    @classmethod
    def parse(cls, text: str) -> "SSpec":
        kind, _, rest = text.partition(":")
        ps = tuple(int(x) for x in rest.split(",") if x.strip())
        return cls({"include": "include", "exclude": "exclude", "exclude_finite": "exclude"}[kind], ps)

    def __contains__(self, p: int) -> bool:
        return (p in self.primes) == (self.kind == "include")

    def describe(self) -> str:
        return f"{self.kind}:{','.join(map(str, self.primes))}"


def valuation(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def s_norm(q: int, S: SSpec) -> Fraction:
    """|q|_S; a cofinite S uses the product formula, so q is never factored."""
    if q == 0:
        raise ValueError("|0|_S is not a positive rational")
    if S.kind == "include":
        out = Fraction(1)
        for p in S.primes:
            out /= p ** valuation(q, p)
        return out
    out = Fraction(1, abs(q))
    for p in S.primes:
        out *= p ** valuation(q, p)
    return out


def _s_parts(primes, N: int) -> list[int]:
    """All products of the given primes that are <= N."""
    out = [1]
    for p in primes:
        nxt = []
        for g in out:
            while g <= N:
                nxt.append(g)
                g *= p
        out = nxt
    return sorted(out)


def weighted_min_lower(X: RatInterval, N: int, primes) -> tuple[Fraction, int]:
    """Exact min over 1 <= s <= N of inf_{x in X} ||s x|| * |s|_S for finite S.

    Grouped by the S-part g of s: each group is a nearest-integer minimum over
    g*X and t <= N/g, solved exactly by Farey neighbours.  Letting t share
    primes with S only adds values dominated by a finer group.
    """
    best = None
    for g in _s_parts(primes, N):
        v, t = min_dist_upto_arg(X.scale(g), N // g)
        val = v / g
        if best is None or (val, g * t) < best:
            best = (val, g * t)
    return best


def weighted_min_loop(X: RatInterval, N: int, S: SSpec) -> tuple[Fraction, int]:
    """Same quantity by direct enumeration (oracle for small N)."""
    return min(((nearest_dist_lower(X, s) * s_norm(s, S), s) for s in range(1, N + 1)))


# -- S = {p} ------------------------------------------------------------------------

@dataclass(frozen=True)
class PadicParams:
    p: int
    betas: tuple[Fraction, ...]
    depth: int

    def __post_init__(self):
        betas = tuple(Fraction(b) for b in self.betas)
        if not is_prime(self.p):
            raise ValueError("p must be prime")
        if not betas or not all(0 < b < Fraction(1, 2) for b in betas):
            raise ValueError("each beta must lie in (0, 1/2)")
        if self.depth < 1:
            raise ValueError("depth must be positive")
        object.__setattr__(self, "betas", betas)

    def beta(self, k: int) -> Fraction:
        return self.betas[min(k, len(self.betas) - 1)]


@dataclass(frozen=True)
class PadicLevel:
    a: int
    u: int
    beta: Fraction
    Q: int
    interval: RatInterval

    def to_json(self) -> dict:
        return {"a": self.a, "u": self.u, "beta": rat_str(self.beta), "Q": self.Q, "I": self.interval.to_json()}


def _min_exponent(p: int, beta: Fraction) -> int:
    # smallest a with beta p^a >= 1 - beta, which turns (1-beta) p^-a into >= (1-2beta)/Q
    a = 1
    while beta * p**a < 1 - beta:
        a += 1
    return a


def _padic_interval(p: int, a: int, u: int, beta: Fraction) -> RatInterval:
    c = Fraction(u, p**a)
    rho = beta / Fraction(p) ** (2 * a) / 2
    return RatInterval(c - rho, c + rho)


def build_padic(params: PadicParams) -> list[PadicLevel]:
    """Nested intervals of radius beta_k p^(-2a_k)/2 around u_k/p^(a_k), p not dividing u_k.

    u_{k+1} = u_k p^(a_{k+1}-a_k) + 1 keeps the earlier digits and forces a
    nonzero last digit; a_{k+1} is the least exponent for which the new interval
    lies strictly inside the previous centre's window at the new beta.
    """
    p = params.p
    a = _min_exponent(p, params.beta(0))
    u = p**a // 2
    if u % p == 0:
        u += 1
    levels = [PadicLevel(a, u, params.beta(0), p**a - 1, _padic_interval(p, a, u, params.beta(0)))]
    for k in range(1, params.depth):
        prev = levels[-1]
        beta = params.beta(k)
        a = max(prev.a + 1, _min_exponent(p, beta))
        while True:
            u = prev.u * p ** (a - prev.a) + 1
            I = _padic_interval(p, a, u, beta)
            # the new interval must also fit the previous centre's window at the new beta
            outer = _padic_interval(p, prev.a, prev.u, min(beta, prev.beta))
            if outer.lo < I.lo and I.hi < outer.hi:
                break
            a += 1
        levels.append(PadicLevel(a, u, beta, p**a - 1, I))
    for lv in levels:
        assert lv.u % p != 0
    return levels


@dataclass
class SCertificate:
    k: int
    Q: int
    value: Fraction
    argmin: int
    floor: Fraction
    ceiling: Fraction | None = None
    cases: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.value >= self.floor and (self.ceiling is None or self.value <= self.ceiling)

    def to_json(self) -> dict:
        d = {
            "k": self.k,
            "Q": self.Q,
            "value": rat_str(self.value),
            "value_approx": float(self.value),
            "argmin": self.argmin,
            "floor": rat_str(self.floor),
            "ok": self.ok,
        }
        if self.ceiling is not None:
            d["ceiling"] = rat_str(self.ceiling)
        if self.cases:
            d["cases"] = self.cases
        return d


class Inconclusive(RuntimeError):
    pass


def certify_padic(enclosure: RatInterval, levels: list[PadicLevel], k: int, p: int) -> SCertificate:
    """Q_k min_{s<=Q_k} ||s xi|| |s|_p over the enclosure; lies in [1 - 2 beta_k, 1]."""
    lv = levels[k]
    if not lv.interval.contains_interval(enclosure):
        raise Inconclusive(f"enclosure is not inside the level-{k} interval")
    val, arg = weighted_min_lower(enclosure, lv.Q, (p,))
    return SCertificate(k, lv.Q, lv.Q * val, arg, 1 - 2 * lv.beta, Fraction(1))


def padic_run(params: PadicParams) -> tuple[list[PadicLevel], list[SCertificate]]:
    """Levels 0..depth-1 certified over the interval of one further level."""
    levels = build_padic(PadicParams(params.p, params.betas, params.depth + 1))
    enc = levels[-1].interval
    certs = [certify_padic(enc, levels, k, params.p) for k in range(params.depth)]
    return levels[: params.depth], certs


# -- finite S, twisted window ---------------------------------------------------------

WINDOW_LO, WINDOW_HI = Fraction(1, 5), Fraction(3, 10)  # strictly inside (1/6, 1/3)


@dataclass(frozen=True)
class STwistedLevel:
    a: int
    p: int
    Q: int
    interval: RatInterval

    def to_json(self) -> dict:
        return {"a": self.a, "p": self.p, "Q": self.Q, "I": self.interval.to_json()}


def _twisted_window(p: int, qa: int, Q: int) -> RatInterval:
    x = Fraction(p, qa)
    return RatInterval(x + WINDOW_LO / (Q * qa), x + WINDOW_HI / (Q * qa))


def _central_admissible(lo: int, hi: int, base: int, fits, tries: int = 64) -> int | None:
    """The integer in [lo, hi] nearest the middle that is prime to base and fits."""
    if lo > hi:
        return None
    mid = (lo + hi) // 2
    for off in range(tries):
        for c in (mid + off, mid - off - 1):
            if lo <= c <= hi and c % base and fits(c):
                return c
    return None


def build_s_twisted(S: SSpec, base: int, phi: StepFunctionSpec, depth: int,
                    I0: RatInterval = RatInterval(Fraction(1, 10), Fraction(9, 10)),
                    max_exponent: int = 4096) -> list[STwistedLevel]:
    """Levels with 1/(6Q) < |base^a xi - p| < 1/(3Q), Q = Phi^-1(base^a), gcd(p, base) = 1."""
    if S.kind != "include":
        raise ValueError("the twisted construction needs a finite S")
    if base in S or not is_prime(base):
        raise ValueError("base must be a prime outside S")
    if not phi.nondecreasing or not phi.unbounded:
        raise ValueError("Phi must be nondecreasing and unbounded")
    levels: list[STwistedLevel] = []
    I, a = I0, 0
    for _ in range(depth):
        while True:
            a += 1
            if a > max_exponent:
                raise RuntimeError("exponent cutoff exceeded")
            qa = base**a
            Q = phi.inverse(qa)
            # admissible p: window strictly inside I
            lo = (I.lo * qa).__floor__() + 1
            hi = ((I.hi - WINDOW_HI / (Q * qa)) * qa).__ceil__() - 1
            p = _central_admissible(lo, hi, base, lambda c: I.strictly_contains(_twisted_window(c, qa, Q)))
            if p is not None:
                break
        W = _twisted_window(p, qa, Q)
        levels.append(STwistedLevel(a, p, Q, W))
        I = W
    return levels


def certify_s_twisted(enclosure: RatInterval, levels: list[STwistedLevel], k: int, S: SSpec,
                      phi: StepFunctionSpec, base: int = 2, exhaustive_limit: int = 200_000) -> SCertificate:
    """Q Phi(Q) min_{s<=Q} ||s xi|| |s|_S >= 1/3, with multiples of base^a split out."""
    lv = levels[k]
    if not lv.interval.contains_interval(enclosure):
        raise Inconclusive(f"enclosure is not inside the level-{k} interval")
    Q, qa = lv.Q, base**lv.a
    scale = Q * phi(Q)
    val, arg = weighted_min_lower(enclosure, Q, S.primes)
    # case 1: s = y base^a, |s|_S = |y|_S
    v1, y = weighted_min_lower(enclosure.scale(qa), Q // qa, S.primes) if Q >= qa else (None, None)
    cases = {}
    if v1 is not None:
        cases["multiple"] = {"value": rat_str(scale * v1), "s": y * qa, "floor": rat_str(phi(Q) / 6),
                             "ok": scale * v1 >= phi(Q) / 6}
    if arg % qa:
        cases["independent"] = {"value": rat_str(scale * val), "s": arg, "exact": True}
    elif Q <= exhaustive_limit:
        sx = ScaledInterval(enclosure)
        v2, s2 = min((Fraction(sx.lower_num(s), sx.d) * s_norm(s, S), s) for s in range(1, Q + 1) if s % qa)
        cases["independent"] = {"value": rat_str(scale * v2), "s": s2, "exact": True}
    else:
        cases["independent"] = {"value_at_least": rat_str(scale * val), "exact": False}
    return SCertificate(k, Q, scale * val, arg, Fraction(1, 3), None, cases)


# -- single excluded prime ------------------------------------------------------------

def _candidates(xi: CFNumber, Q: int, p: int) -> set[int]:
    """Convergent and intermediate denominators up to Q, times 1..p.

    Intermediates are q_(j-1) + t q_j with 1 <= t <= a_(j+1).
    """
    base = set()
    q_prev, q = 0, 1
    for a in xi.quotients():
        if q > Q:
            break
        base.add(q)
        for t in range(1, a + 1):
            c = q_prev + t * q
            if c > Q:
                break
            base.add(c)
        q_prev, q = q, a * q + q_prev
    else:
        if q <= Q:
            base.add(q)
    return {c * y for c in base for y in range(1, p + 1) if c * y <= Q}


@dataclass
class ScanRow:
    Q: int
    lower: Fraction | None
    upper: Fraction
    argmin: int
    exhaustive: bool

    def to_json(self) -> dict:
        return {
            "Q": self.Q,
            "value": rat_str(self.upper) if self.lower == self.upper else None,
            "lower": None if self.lower is None else rat_str(self.lower),
            "upper": rat_str(self.upper),
            "upper_approx": float(self.upper),
            "argmin": self.argmin,
            "exhaustive": self.exhaustive,
        }


def singleton_scan(xi: CFNumber, excluded: int, Q_list, exhaustive_limit: int = 10**4) -> list[ScanRow]:
    """f(Q) = Q min_{q<=Q} ||q xi|| |q|_S for S = all primes except ``excluded``.

    Up to ``exhaustive_limit`` every q is visited and both a lower and an upper
    bound are exact consequences of the xi enclosure; beyond it only the
    candidate set is used, which gives an upper bound.
    """
    Q_list = sorted(Q_list)
    S = SSpec.exclude(excluded)
    Qmax = Q_list[-1]
    X = scan_enclosure(xi, Qmax)
    sx = ScaledInterval(X)
    rows = []
    best_lo = best_hi = None
    arg = 1
    q = 0
    for Q in Q_list:
        if Q <= exhaustive_limit:
            while q < Q:
                q += 1
                w = s_norm(q, S)
                lo = Fraction(sx.lower_num(q), sx.d) * w
                hi = nearest_dist_upper(X, q) * w
                if best_lo is None or lo < best_lo:
                    best_lo = lo
                if best_hi is None or hi < best_hi:
                    best_hi, arg = hi, q
            rows.append(ScanRow(Q, Q * best_lo, Q * best_hi, arg, True))
        else:
            cands = _candidates(xi, Q, excluded)
            hi, a = min((nearest_dist_upper(X, c) * s_norm(c, S), c) for c in cands)
            rows.append(ScanRow(Q, None, Q * hi, a, False))
    return rows


def scan_enclosure(xi: CFNumber, Q: int) -> RatInterval:
    """Convergent enclosure of width < 1/(4 Q^4); the exact point for a rational."""
    return xi.enclosure(Fraction(1, 4 * Q**4))


def candidate_upper(xi: CFNumber, excluded: int, Q: int, X: RatInterval | None = None) -> tuple[Fraction, int]:
    """Q times the minimum over the candidate set only (an upper bound for f(Q))."""
    S = SSpec.exclude(excluded)
    X = X if X is not None else scan_enclosure(xi, Q)
    v, c = min((nearest_dist_upper(X, c) * s_norm(c, S), c) for c in _candidates(xi, Q, excluded))
    return Q * v, c
