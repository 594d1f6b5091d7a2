"""Search for and independently verify witness quadruples (p, q, r, s).

A witness satisfies, for primes q != s:
  C1  1/tau < q/s < tau
  C2  p/q in I and r/s in J
  C3  {ps/q} and {qr/s} lie in F_m
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from ._parallel import pmap
from .ratcore import CFWord, RatInterval, as_rational, cf_expand, rat_str
from .zaremba import _fm_int, is_Fm, is_prime, sieve_primes, zaremba_numerators

TENTH, NINE_TENTHS = Fraction(1, 10), Fraction(9, 10)
# Intervals holding fewer than this many fractions p/q (on average) are scanned
# directly; wider ones go through the Zaremba numerators.
WINDOW_CUTOFF = 32


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    I: RatInterval
    J: RatInterval
    tau: Fraction
    m: int
    T_lo: int
    T_hi: int
    max_witnesses: int | None = 1
    left_margin: Fraction = Fraction(0)
    strategy: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "tau", as_rational(self.tau))
        object.__setattr__(self, "left_margin", as_rational(self.left_margin))
        for name in ("I", "J"):
            X = getattr(self, name)
            if not (TENTH < X.lo < X.hi < NINE_TENTHS):
                raise ConfigError(f"{name}={X} must be a subinterval of (1/10, 9/10) of positive length")
        if self.tau <= 1:
            raise ConfigError(f"tau must exceed 1, got {self.tau}")
        if self.m < 1:
            raise ConfigError("m must be positive")
        if not 2 <= self.T_lo <= self.T_hi:
            raise ConfigError(f"bad prime range {self.T_lo}:{self.T_hi}")
        if self.max_witnesses is not None and self.max_witnesses < 1:
            raise ConfigError("max_witnesses must be positive (or None for all)")
        if self.left_margin < 0 or self.left_margin >= min(self.I.width, self.J.width):
            raise ConfigError("left_margin must be in [0, min width)")
        if self.strategy not in ("auto", "window", "inversion"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")

    @property
    def I_search(self) -> RatInterval:
        return RatInterval(self.I.lo, self.I.hi - self.left_margin)

    @property
    def J_search(self) -> RatInterval:
        return RatInterval(self.J.lo, self.J.hi - self.left_margin)

    def to_json(self) -> dict:
        return {
            "I": self.I.to_json(),
            "J": self.J.to_json(),
            "tau": rat_str(self.tau),
            "m": self.m,
            "T_lo": self.T_lo,
            "T_hi": self.T_hi,
            "max_witnesses": self.max_witnesses,
            "left_margin": rat_str(self.left_margin),
        }


@dataclass(frozen=True, order=True)
class Quadruple:
    q: int
    s: int
    p: int
    r: int

    def as_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r, "s": self.s}


@dataclass
class WitnessCertificate:
    quadruple: Quadruple
    ratio: Fraction
    cf_ps_over_q: CFWord
    cf_qr_over_s: CFWord
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_json(self) -> dict:
        d = self.quadruple.as_dict()
        d.update(
            ratio=rat_str(self.ratio),
            cf1=self.cf_ps_over_q.as_list(),
            cf2=self.cf_qr_over_s.as_list(),
        )
        return d


def verify_witness(quad: Quadruple, I: RatInterval, J: RatInterval, tau, m: int) -> WitnessCertificate:
    """Recheck C1-C3, reducedness and primality from scratch."""
    tau = as_rational(tau)
    p, q, r, s = quad.p, quad.q, quad.r, quad.s
    checks = {
        "primality": is_prime(q) and is_prime(s) and q != s,
        "reducedness": math.gcd(p * s, q) == 1 and math.gcd(q * r, s) == 1,
    }
    ratio = Fraction(q, s)
    checks["C1"] = 1 / tau < ratio < tau
    checks["C2"] = Fraction(p, q) in I and Fraction(r, s) in J
    x1 = Fraction(p * s, q) % 1
    x2 = Fraction(q * r, s) % 1
    checks["C3"] = 0 < x1 < 1 and 0 < x2 < 1 and is_Fm(x1, m) and is_Fm(x2, m)
    cf1 = cf_expand(x1) if checks["reducedness"] else CFWord(0)
    cf2 = cf_expand(x2) if checks["reducedness"] else CFWord(0)
    return WitnessCertificate(quad, ratio, cf1, cf2, checks)


# -- search --------------------------------------------------------------------

def _ceil_frac(x: Fraction, q: int) -> int:
    return -(-x.numerator * q // x.denominator)


def _floor_frac(x: Fraction, q: int) -> int:
    return x.numerator * q // x.denominator


def _window(X: RatInterval, q: int) -> tuple[int, int]:
    """Integers p with p/q in X, as a half-open range."""
    lo = max(1, _ceil_frac(X.lo, q))
    hi = min(q - 1, _floor_frac(X.hi, q))
    return lo, hi + 1


def _side(q: int, s: int, X: RatInterval, m: int, use_window: bool) -> list[int]:
    """All p with p/q in X and (p*s mod q)/q in F_m, ascending."""
    lo, hi = _window(X, q)
    if lo >= hi:
        return []
    if use_window:
        return [p for p in range(lo, hi) if _fm_int(p * s % q, q, m)]
    inv = pow(s, -1, q)
    return sorted(p for u in zaremba_numerators(q, m).numerators if lo <= (p := u * inv % q) < hi)


def _use_window(cfg: SearchConfig, X: RatInterval, q: int) -> bool:
    if cfg.strategy != "auto":
        return cfg.strategy == "window"
    return X.width * q < WINDOW_CUTOFF


def _pair_task(args) -> list[Quadruple]:
    cfg, q, partners = args
    I, J = cfg.I_search, cfg.J_search
    out: list[Quadruple] = []
    for s in partners:
        ps = _side(q, s, I, cfg.m, _use_window(cfg, I, q))
        if not ps:
            continue
        rs = _side(s, q, J, cfg.m, _use_window(cfg, J, s))
        out.extend(Quadruple(q, s, p, r) for p in ps for r in rs)
    return out


def _candidates(cfg: SearchConfig, primes: list[int]) -> list[tuple[int, list[int]]]:
    """(q, admissible partners s) for every q, skipping primes with empty windows."""
    I, J = cfg.I_search, cfg.J_search
    with_p = [q for q in primes if _window(I, q)[0] < _window(I, q)[1]]
    with_r = [s for s in primes if _window(J, s)[0] < _window(J, s)[1]]
    tn, td = cfg.tau.numerator, cfg.tau.denominator
    out = []
    for q in with_p:
        # s with q/tau < s < q*tau, i.e. q*td < s*tn and s*td < q*tn
        a = bisect_right(with_r, q * td // tn)
        b = bisect_left(with_r, -(-q * tn // td))
        partners = [s for s in with_r[a:b] if s != q and q * td < s * tn and s * td < q * tn]
        if partners:
            out.append((q, partners))
    return out


def find_witnesses(cfg: SearchConfig, threads: int = 1) -> list[WitnessCertificate]:
    """Witnesses in (q, s, p, r) order, each verified independently before release.

    Work is handed out in batches of whole q values and merged in q order, so
    the truncation at ``max_witnesses`` does not depend on ``threads``.
    """
    primes = sieve_primes(cfg.T_lo, cfg.T_hi)
    tasks = [(cfg, q, partners) for q, partners in _candidates(cfg, primes)]
    found: list[WitnessCertificate] = []
    cap = cfg.max_witnesses
    batch = 4 * max(1, threads)
    for start in range(0, len(tasks), batch):
        for quads in pmap(_pair_task, tasks[start : start + batch], threads, chunksize=1):
            for quad in quads:
                cert = verify_witness(quad, cfg.I, cfg.J, cfg.tau, cfg.m)
                if not cert.ok:
                    raise AssertionError(f"search emitted an invalid witness {quad}: {cert.failed}")
                u = quad.p * quad.s % quad.q
                assert Fraction(quad.p * quad.s, quad.q) % 1 == Fraction(u, quad.q)
                found.append(cert)
                if cap is not None and len(found) >= cap:
                    return found
    return found


def brute_force_witnesses(I: RatInterval, J: RatInterval, tau, m: int, T_lo: int, T_hi: int) -> list[Quadruple]:
    """Oracle: every (p, q, r, s) with p < q, r < s, tested literally."""
    tau = as_rational(tau)
    primes = [n for n in range(T_lo, T_hi + 1) if is_prime(n)]
    out = []
    for q in primes:
        for s in primes:
            if s == q or not 1 / tau < Fraction(q, s) < tau:
                continue
            ps = [p for p in range(1, q) if Fraction(p, q) in I and is_Fm(Fraction(p * s % q, q), m)]
            if not ps:
                continue
            rs = [r for r in range(1, s) if Fraction(r, s) in J and is_Fm(Fraction(q * r % s, s), m)]
            out.extend(Quadruple(q, s, p, r) for p in ps for r in rs)
    return sorted(out)
