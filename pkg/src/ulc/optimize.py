"""Maximize the two-branch lower bound of the nested-interval construction over (d, beta).

The bound is ``min{(1 - beta d)^2 d, rho beta d ((m+2)^-1 - beta d^2 / tau) / tau^2}``
with ``alpha = rho * beta``; the classical setting is ``tau = rho = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath import mpf

DPS = 60
NEG_INF = mpf("-inf")


@dataclass(frozen=True)
class OptResult:
    m: int
    tau: mpf
    rho: mpf
    d_star: mpf
    beta_star: mpf
    bound: mpf
    branch_gap: mpf
    refine_gain: mpf

    def to_json(self, digits: int = 30) -> dict:
        s = lambda x: mpmath.nstr(x, digits, strip_zeros=False)  # noqa: E731
        return {
            "m": self.m,
            "precision": f"approximate: decimals to {digits} significant digits",
            "tau": s(self.tau),
            "rho": s(self.rho),
            "d_star": s(self.d_star),
            "beta_star": s(self.beta_star),
            "bound": s(self.bound),
            "branch_gap": mpmath.nstr(self.branch_gap, 5),
            "approx": {
                "d_star": float(self.d_star),
                "beta_star": float(self.beta_star),
                "bound": float(self.bound),
            },
        }


def _mp(x) -> mpf:
    if isinstance(x, mpf):
        return x
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def branches(d, beta, m: int, tau=1, rho=1) -> tuple[mpf, mpf]:
    d, beta, tau, rho = map(_mp, (d, beta, tau, rho))
    b1 = (1 - beta * d) ** 2 * d
    b2 = rho * beta * d * (mpf(1) / (m + 2) - beta * d**2 / tau) / tau**2
    return b1, b2


def feasible(d, beta, m: int, tau=1) -> bool:
    d, beta, tau = _mp(d), _mp(beta), _mp(tau)
    return 0 < d <= 1 and 0 < beta < min(tau / (d**2 * (m + 2)), 1 / d)


def objective(d, beta, m: int, tau=1, rho=1) -> mpf:
    """min of the two branches, or -inf outside the constraint region."""
    with mpmath.workdps(DPS):
        if not feasible(d, beta, m, tau):
            # the closed boundary beta = 0 or beta*d = 1 still evaluates
            d_, b_ = _mp(d), _mp(beta)
            if not (0 < d_ <= 1 and 0 <= b_ and b_ * d_ <= 1):
                return NEG_INF
        return min(branches(d, beta, m, tau, rho))


def discriminant(d, m: int, tau=1, rho=1) -> mpf:
    d, tau, rho = _mp(d), _mp(tau), _mp(rho)
    a = d**2 * (tau**2 + rho / tau)
    b = 2 * d * tau**2 + rho / (m + 2)
    return b * b - 4 * a * tau**2


def beta_equilibrium(d, m: int, tau=1, rho=1) -> mpf | None:
    """Smaller root of the quadratic equating both branches; None if complex."""
    with mpmath.workdps(DPS):
        d, tau, rho = _mp(d), _mp(tau), _mp(rho)
        disc = discriminant(d, m, tau, rho)
        if disc < 0:
            return None
        a = d**2 * (tau**2 + rho / tau)
        b = 2 * d * tau**2 + rho / (m + 2)
        return (b - mpmath.sqrt(disc)) / (2 * a)


def _profile(d, m, tau, rho) -> mpf:
    beta = beta_equilibrium(d, m, tau, rho)
    if beta is None or not feasible(d, beta, m, tau):
        return NEG_INF
    return min(branches(d, beta, m, tau, rho))


def _golden(f, a, b, rel=mpf("1e-14")):
    invphi = (mpmath.sqrt(5) - 1) / 2
    c, e = b - invphi * (b - a), a + invphi * (b - a)
    fc, fe = f(c), f(e)
    while b - a > rel * abs(b):
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = f(e)
    return (a + b) / 2


def solve(m: int, tau=1, rho=1, grid: int = 400) -> OptResult:
    """Optimal (d, beta) along the equilibrium curve, refined locally in 2-D."""
    if m < 1:
        raise ValueError("m must be positive")
    with mpmath.workdps(DPS):
        tau, rho = _mp(tau), _mp(rho)
        f = lambda d: _profile(d, m, tau, rho)  # noqa: E731
        # log-spaced bracket on (0, 1]
        ds = [mpf(10) ** (-6 + 6 * mpf(i) / grid) for i in range(grid + 1)]
        vals = [f(d) for d in ds]
        i = max(range(len(ds)), key=lambda j: vals[j])
        lo, hi = ds[max(i - 1, 0)], ds[min(i + 1, grid)]
        d_star = _golden(f, lo, hi)
        beta_star = beta_equilibrium(d_star, m, tau, rho)
        b1, b2 = branches(d_star, beta_star, m, tau, rho)
        bound = min(b1, b2)
        gain = _refine_gain(d_star, beta_star, bound, m, tau, rho)
        return OptResult(m, tau, rho, d_star, beta_star, bound, abs(b1 - b2), gain)


def _refine_gain(d, beta, bound, m, tau, rho) -> mpf:
    """Best relative improvement found by a pattern search around (d, beta)."""
    best = bound
    for scale in (mpf("1e-3"), mpf("1e-5"), mpf("1e-7"), mpf("1e-9")):
        for sd in (-1, 0, 1):
            for sb in (-1, 0, 1):
                v = objective(d * (1 + sd * scale), beta * (1 + sb * scale), m, tau, rho)
                best = max(best, v)
    return (best - bound) / bound
