"""Exceptional multipliers for a set of residues and a window, with the
exponential-sum and discrepancy checks around them.

For a prime N, a residue set M and a window H = {L+1, ..., L+H}, the
exceptional set is E = {e in [1, N-1] : e^-1 H mod N misses M}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._parallel import pmap
from .ratcore import rat_str
from .zaremba import is_prime, zaremba_numerators

C_ET = 3
TOL = 1e-6


@dataclass(frozen=True)
class ProductSetInstance:
    N: int
    M: frozenset
    L: int
    H: int

    def __post_init__(self):
        object.__setattr__(self, "M", frozenset(int(x) for x in self.M))
        if not is_prime(self.N):
            raise ValueError(f"N={self.N} is not prime")
        if self.L < 0 or self.H < 1 or self.L + self.H > self.N - 1:
            raise ValueError("need L >= 0, H >= 1 and L + H <= N - 1")
        if any(not 0 <= x < self.N for x in self.M):
            raise ValueError("residues must lie in [0, N-1]")

    @property
    def window(self) -> range:
        return range(self.L + 1, self.L + self.H + 1)

    @property
    def d(self) -> Fraction:
        return Fraction(self.H, self.N)

    @property
    def sigma_floor(self) -> float | None:
        return math.log(len(self.M)) / math.log(self.N) if self.M else None

    @classmethod
    def middle_third(cls, N: int, M) -> "ProductSetInstance":
        L = N // 3
        return cls(N, frozenset(M), L, 2 * N // 3 - L)

    @classmethod
    def zaremba(cls, N: int, m: int) -> "ProductSetInstance":
        return cls.middle_third(N, zaremba_numerators(N, m).numerators)


@dataclass(frozen=True)
class ExceptionalReport:
    E: tuple[int, ...]

    @property
    def card(self) -> int:
        return len(self.E)

    def eta_fit(self, N: int) -> float | None:
        if not self.E:
            return None
        return 1 - math.log(len(self.E)) / math.log(N)


def _exceptional_via_inverse(inst: ProductSetInstance) -> list[int]:
    N, M = inst.N, inst.M
    out = []
    for e in range(1, N):
        inv = pow(e, -1, N)
        if all(inv * h % N not in M for h in inst.window):
            out.append(e)
    return out


def _exceptional_via_dilation(inst: ProductSetInstance) -> list[int]:
    N = inst.N
    lo, hi = inst.L + 1, inst.L + inst.H
    Ms = np.fromiter(sorted(inst.M), dtype=np.int64)
    out = []
    for e in range(1, N):
        img = (e * Ms) % N
        if not np.any((img >= lo) & (img <= hi)):
            out.append(e)
    return out


def exceptional_set(inst: ProductSetInstance) -> ExceptionalReport:
    """Exhaustive E, computed two ways that must agree."""
    if not inst.M:
        raise ValueError("M must be nonempty")
    a = _exceptional_via_inverse(inst)
    b = _exceptional_via_dilation(inst)
    if a != b:
        raise AssertionError(f"exceptional set characterizations disagree for N={inst.N}")
    return ExceptionalReport(tuple(a))


def _counts(E, M, N: int) -> np.ndarray:
    """c[k] = #{(e, m) : e m = k mod N}."""
    c = np.zeros(N, dtype=np.int64)
    Ms = np.fromiter(sorted(M), dtype=np.int64)
    for e in E:
        np.add.at(c, (e * Ms) % N, 1)
    return c


def exp_sums(E, M, N: int) -> np.ndarray:
    """|S(lambda)| for every lambda in [0, N-1] via one DFT of the product counts."""
    c = _counts(E, M, N)
    # sum_k c_k exp(2 pi i lambda k / N) = N * ifft(c)
    return np.abs(np.fft.ifft(c) * N)


def exp_sum(lam: int, E, M, N: int) -> float:
    """|sum_{e in E} sum_{m in M} exp(2 pi i lam e m / N)| by direct summation."""
    E, M = list(E), list(M)
    if lam % N == 0:
        return float(len(E) * len(M))
    if not E or not M:
        return 0.0
    ks = (lam * np.outer(np.asarray(E, dtype=np.int64), np.asarray(M, dtype=np.int64))) % N
    return float(abs(np.exp(2j * np.pi * ks / N).sum()))


@dataclass
class VinogradovReport:
    max_ratio: float
    violations: list[int]
    bound: float

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_vinogradov(inst: ProductSetInstance, E=None) -> VinogradovReport:
    """|S(lambda)| <= sqrt(N |E| |M|) for all lambda in [1, N-1]."""
    if E is None:
        E = exceptional_set(inst).E
    N = inst.N
    bound = math.sqrt(N * len(E) * len(inst.M))
    if not E:
        return VinogradovReport(0.0, [], 0.0)
    S = exp_sums(E, inst.M, N)[1:]
    ratios = S / bound
    viol = [int(i) + 1 for i in np.flatnonzero(S > bound + TOL * bound)]
    return VinogradovReport(float(ratios.max()), viol, bound)


def star_discrepancy(points) -> Fraction:
    """Exact D* = max_k max(k/n - x_(k), x_(k) - (k-1)/n) for points in [0, 1)."""
    xs = sorted(Fraction(x) for x in points)
    if not xs:
        raise ValueError("need at least one point")
    n = len(xs)
    return max(max(Fraction(k, n) - x, x - Fraction(k - 1, n)) for k, x in enumerate(xs, 1))


def _star_discrepancy_int(numerators: np.ndarray, N: int) -> Fraction:
    """Same formula for points k/N given by their integer numerators."""
    xs = np.sort(numerators.astype(np.int64))
    n = len(xs)
    k = np.arange(1, n + 1, dtype=np.int64)
    # compare k/n - x/N and x/N - (k-1)/n over the common denominator n*N
    a = k * N - xs * n
    b = xs * n - (k - 1) * N
    return Fraction(int(max(a.max(), b.max())), n * N)


@dataclass
class ErdosTuranReport:
    status: str
    discrepancy: Fraction | None = None
    bound: float | None = None
    window_count: int | None = None

    @property
    def ok(self) -> bool:
        if self.status == "empty":
            return True
        return self.status == "ok"


def erdos_turan_chain(inst: ProductSetInstance, E=None) -> ErdosTuranReport:
    """Discrepancy of Gamma = {e m / N} against the Erdos-Turan bound, and the empty window."""
    if E is None:
        E = exceptional_set(inst).E
    if not E:
        return ErdosTuranReport("empty", window_count=0)
    N = inst.N
    Ms = np.fromiter(sorted(inst.M), dtype=np.int64)
    gamma = np.concatenate([(e * Ms) % N for e in E])
    delta = _star_discrepancy_int(gamma, N)
    K = N - 1
    S = exp_sums(E, inst.M, N)
    size = len(E) * len(inst.M)
    h = np.arange(1, K + 1)
    B = C_ET * (1 / K + float(np.sum(S[1 : K + 1] / (h * size))))
    lo, hi = inst.L + 1, inst.L + inst.H
    window = int(np.count_nonzero((gamma >= lo) & (gamma <= hi)))
    ok = float(delta) <= B * (1 + TOL) and window == 0
    return ErdosTuranReport("ok" if ok else "violated", delta, B, window)


def _task(args):
    N, m = args
    inst = ProductSetInstance.zaremba(N, m)
    rep = exceptional_set(inst)
    return product_report(inst, rep)


def product_report(inst: ProductSetInstance, rep: ExceptionalReport | None = None) -> dict:
    if rep is None:
        rep = exceptional_set(inst)
    vin = verify_vinogradov(inst, rep.E)
    et = erdos_turan_chain(inst, rep.E)
    N, Mc = inst.N, len(inst.M)
    eta = rep.eta_fit(N)
    raw = rep.card * inst.H**2 * Mc / (N**3 * math.log(N) ** 2)
    return {
        "N": N,
        "M_card": Mc,
        "L": inst.L,
        "H": inst.H,
        "E": list(rep.E),
        "E_card": rep.card,
        "eta_fit": "empty" if eta is None else eta,
        "max_vinogradov_ratio": vin.max_ratio,
        "vinogradov_violations": vin.violations,
        "et_ok": et.ok,
        "et_status": et.status,
        "discrepancy": None if et.discrepancy is None else rat_str(et.discrepancy),
        "et_bound_approx": et.bound,
        "window_count": et.window_count,
        "raw_ratio_approx": raw,
    }


def sweep(lo: int, hi: int, m: int, threads: int = 1) -> list[dict]:
    """Reports for every prime N in [lo, hi] with M the Zaremba numerators and the middle third."""
    primes = [n for n in range(lo, hi + 1) if is_prime(n)]
    return pmap(_task, [(N, m) for N in primes], threads, chunksize=4)


def subgroup_residues(N: int, g: int) -> frozenset:
    """The multiplicative subgroup generated by g mod N."""
    out, x = set(), 1
    while True:
        out.add(x)
        x = x * g % N
        if x == 1:
            return frozenset(out)
