"""Nested-interval construction of a pair (xi, zeta) with certified lower bounds on
Q * min_{0<n<=Q} ||n xi|| * ||n zeta||.

Each level takes a witness (p, q, r, s) inside the current intervals and moves to
the right-hand windows

    I' = [p/q + alpha q^-3, p/q + beta q^-3],   J' = [r/s + alpha s^-3, r/s + beta s^-3],

with Q = d q s / tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from ._parallel import pmap
from .evaluate import min_product
from .ratcore import RatInterval, ScaledInterval, as_rational, rat_str
from .witness import Quadruple, SearchConfig, find_witnesses

CASES = ("generic", "multiple_of_pq", "multiple_of_rs")


class WitnessNotFound(RuntimeError):
    def __init__(self, level: int, T_lo: int, T_hi: int, state: "ConstructionState"):
        super().__init__(f"no witness at level {level} for primes in [{T_lo}, {T_hi}]")
        self.level, self.T_lo, self.T_hi, self.state = level, T_lo, T_hi, state


class Inconclusive(RuntimeError):
    pass


@dataclass(frozen=True)
class BuilderParams:
    m: int
    tau: Fraction
    d: Fraction
    alpha: Fraction
    beta: Fraction
    steps: int
    I0: RatInterval = RatInterval(Fraction(1, 5), Fraction(4, 5))
    J0: RatInterval = RatInterval(Fraction(1, 5), Fraction(4, 5))
    prime_lo: int = 5
    prime_hi: int = 200
    max_prime: int = 10**8

    def __post_init__(self):
        for name in ("tau", "d", "alpha", "beta"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "tau": rat_str(self.tau),
            "d": rat_str(self.d),
            "alpha": rat_str(self.alpha),
            "beta": rat_str(self.beta),
            "steps": self.steps,
            "I0": self.I0.to_json(),
            "J0": self.J0.to_json(),
            "prime_range": f"{self.prime_lo}:{self.prime_hi}",
        }


def validate_params(p: BuilderParams) -> list[str]:
    """Every violated constraint, by name; an empty list means the parameters are admissible."""
    bad = []
    if p.m < 1:
        bad.append("m >= 1")
    if p.tau < 1:
        bad.append("tau >= 1")
    if not 0 < p.d <= 1:
        bad.append("d in (0,1]")
    if not p.alpha > 0:
        bad.append("alpha > 0")
    if not p.alpha < p.beta:
        bad.append("alpha < beta")
    if p.d > 0 and p.m >= 1 and not p.beta < p.tau / (p.d**2 * (p.m + 2)):
        bad.append("beta < tau/(d^2(m+2))")
    if not 1 - p.beta * p.d > 0:
        bad.append("(1-beta*d) <= 0")
    if p.m >= 1 and p.tau > 0 and not Fraction(1, p.m + 2) - p.beta * p.d**2 / p.tau > 0:
        bad.append("(m+2)^-1 - beta*d^2/tau <= 0")
    if p.steps < 1:
        bad.append("steps >= 1")
    return bad


def _C(p: BuilderParams) -> Fraction:
    return Fraction(1, p.m + 2) - p.beta * p.d**2 / p.tau


def analytic_bound(p: BuilderParams) -> Fraction:
    """min{(1-beta d)^2 d, alpha d C / tau^2} with C = (m+2)^-1 - beta d^2 / tau."""
    return min((1 - p.beta * p.d) ** 2 * p.d, p.alpha * p.d * _C(p) / p.tau**2)


def rigorous_floor(p: BuilderParams) -> Fraction:
    """Same bound with the generic branch carrying its 1/tau factor.

    For n not a multiple of q or s the determinant argument gives
    ||n xi|| >= (1-beta d)/q and ||n zeta|| >= (1-beta d)/s, and
    Q/(q s) = d/tau.
    """
    return min((1 - p.beta * p.d) ** 2 * p.d / p.tau, p.alpha * p.d * _C(p) / p.tau**2)


@dataclass
class ConstructionState:
    level: int
    I: RatInterval
    J: RatInterval
    history: list[tuple[Quadruple, Fraction]] = field(default_factory=list)
    intervals: list[tuple[RatInterval, RatInterval]] = field(default_factory=list)

    @classmethod
    def initial(cls, p: BuilderParams) -> "ConstructionState":
        return cls(0, p.I0, p.J0, [], [(p.I0, p.J0)])


def next_window(x: Fraction, q: int, alpha: Fraction, beta: Fraction) -> RatInterval:
    return RatInterval(x + alpha / Fraction(q) ** 3, x + beta / Fraction(q) ** 3)


def _min_T_lo(state: ConstructionState, p: BuilderParams) -> int:
    """Smallest prime bound T with beta/T^3 < width of both current intervals."""
    if not state.history:
        return p.prime_lo
    quad, _ = state.history[-1]
    big = max(quad.q, quad.s)
    # beta * big^3 < (beta - alpha) * T^3
    T = max(2, int(big * float(p.beta / (p.beta - p.alpha)) ** (1 / 3)) - 2)
    while (p.beta - p.alpha) * T**3 <= p.beta * big**3:
        T += 1
    return T


def _fits(quad: Quadruple, state: ConstructionState, p: BuilderParams) -> bool:
    I1 = next_window(Fraction(quad.p, quad.q), quad.q, p.alpha, p.beta)
    J1 = next_window(Fraction(quad.r, quad.s), quad.s, p.alpha, p.beta)
    return state.I.strictly_contains(I1) and state.J.strictly_contains(J1)


def step(state: ConstructionState, p: BuilderParams, threads: int = 1,
         candidates: int = 256) -> ConstructionState:
    """One level: find a witness inside (I_k, J_k) and pass to the right-hand windows.

    Witnesses are taken in canonical order; one whose next window would poke
    out of I_k or J_k is rejected.  If none of the first ``candidates`` fits,
    the search is redone with the left margin beta/T_lo^3, which forces a fit.
    """
    T_lo = _min_T_lo(state, p)
    T_hi = p.prime_hi if not state.history else 4 * T_lo
    quad = None
    while quad is None:
        cfg = SearchConfig(state.I, state.J, p.tau, p.m, T_lo, T_hi, candidates)
        found = [w.quadruple for w in find_witnesses(cfg, threads)]
        fitting = [w for w in found if _fits(w, state, p)]
        if fitting:
            quad = fitting[0]
        elif found:
            margin = p.beta / Fraction(T_lo) ** 3
            cfg = replace(cfg, max_witnesses=1, left_margin=margin)
            again = find_witnesses(cfg, threads)
            if again:
                quad = again[0].quadruple
        if quad is None:
            if T_hi >= p.max_prime or not state.history:
                raise WitnessNotFound(state.level, T_lo, T_hi, state)
            T_hi = min(2 * T_hi, p.max_prime)
    I_next = next_window(Fraction(quad.p, quad.q), quad.q, p.alpha, p.beta)
    J_next = next_window(Fraction(quad.r, quad.s), quad.s, p.alpha, p.beta)
    if not (state.I.strictly_contains(I_next) and state.J.strictly_contains(J_next)):
        raise AssertionError(f"nesting failed at level {state.level} for {quad}")
    Q = p.d * quad.q * quad.s / p.tau
    return ConstructionState(
        state.level + 1,
        I_next,
        J_next,
        state.history + [(quad, Q)],
        state.intervals + [(I_next, J_next)],
    )


@dataclass
class StepCertificate:
    k: int
    Q: Fraction
    analytic_bound: Fraction
    rigorous_floor: Fraction
    certified_lower: Fraction
    argmin_n: int
    case: str
    case_min: dict[str, tuple[Fraction, int] | None]
    counts: dict[str, int]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "Qk": rat_str(self.Q),
            "certified_lower": rat_str(self.certified_lower),
            "certified_lower_approx": float(self.certified_lower),
            "analytic_bound": rat_str(self.analytic_bound),
            "analytic_bound_approx": float(self.analytic_bound),
            "rigorous_floor": rat_str(self.rigorous_floor),
            "argmin_n": self.argmin_n,
            "case": self.case,
            "cases": {
                c: None if v is None else {"value": rat_str(v[0]), "n": v[1], "count": self.counts[c]}
                for c, v in self.case_min.items()
            },
        }


def _case_of(n: int, q: int, s: int) -> int:
    if n % q == 0:
        return 1
    if n % s == 0:
        return 2
    return 0


def _certify_chunk(args):
    (ax, bx, dx), (ay, by, dy), q, s, n0, n1 = args
    best = [None, None, None]
    arg = [0, 0, 0]
    count = [0, 0, 0]
    for n in range(n0, n1):
        lo, hi = n * ax, n * bx
        if lo // dx != hi // dx or lo % dx == 0:
            vx = 0
        else:
            r1, r2 = lo % dx, hi % dx
            vx = min(r1, dx - r1, r2, dx - r2)
        lo, hi = n * ay, n * by
        if lo // dy != hi // dy or lo % dy == 0:
            vy = 0
        else:
            r1, r2 = lo % dy, hi % dy
            vy = min(r1, dy - r1, r2, dy - r2)
        v = vx * vy
        c = 1 if n % q == 0 else 2 if n % s == 0 else 0
        count[c] += 1
        if best[c] is None or v < best[c]:
            best[c], arg[c] = v, n
    return best, arg, count


def certify(state: ConstructionState, k: int, p: BuilderParams, threads: int = 1,
            chunk: int = 1 << 15) -> StepCertificate:
    """Exact lower bound for level k over the current (narrowest) enclosure."""
    if not 0 <= k < len(state.history):
        raise ValueError(f"level {k} not built yet")
    quad, Q = state.history[k]
    q, s = quad.q, quad.s
    X, Y = state.I, state.J
    limit = min(Fraction(1, q**3), Fraction(1, s**3))
    if not (X.width < limit and Y.width < limit):
        raise Inconclusive(f"enclosure too wide to certify level {k}; run more steps")
    sx, sy = ScaledInterval(X), ScaledInterval(Y)
    N = math.floor(Q)
    if N < 1:
        raise Inconclusive(f"Q_{k} = {Q} < 1")
    tasks = [((sx.a, sx.b, sx.d), (sy.a, sy.b, sy.d), q, s, n0, min(n0 + chunk, N + 1))
             for n0 in range(1, N + 1, chunk)]
    best = [None, None, None]
    arg = [0, 0, 0]
    count = [0, 0, 0]
    for b, a, c in pmap(_certify_chunk, tasks, threads, chunksize=1):
        for i in range(3):
            count[i] += c[i]
            if b[i] is not None and (best[i] is None or b[i] < best[i]):
                best[i], arg[i] = b[i], a[i]
    den = sx.d * sy.d
    case_min = {
        CASES[i]: None if best[i] is None else (Q * Fraction(best[i], den), arg[i]) for i in range(3)
    }
    i_min = min((i for i in range(3) if best[i] is not None), key=lambda i: (best[i], arg[i]))
    value = Q * Fraction(best[i_min], den)
    if value <= 0:
        raise Inconclusive(f"level {k}: n={arg[i_min]} has a zero lower bound")
    return StepCertificate(
        k, Q, analytic_bound(p), rigorous_floor(p), value, arg[i_min], CASES[i_min],
        case_min, dict(zip(CASES, count)),
    )


def midpoint_value(state: ConstructionState, k: int) -> Fraction:
    """Q_k * min_{n <= floor(Q_k)} ||n x|| ||n y|| at the enclosure midpoints."""
    _, Q = state.history[k]
    return Q * min_product([state.I.mid, state.J.mid], math.floor(Q)).value


def placement_ok(state: ConstructionState, k: int, p: BuilderParams) -> bool:
    """alpha q^-2 <= |q x - p| <= beta q^-2 on the whole next interval (and likewise for s)."""
    quad, _ = state.history[k]
    I1, J1 = state.intervals[k + 1]
    ok = True
    for (num, den), X in (((quad.p, quad.q), I1), ((quad.r, quad.s), J1)):
        for x in (X.lo, X.hi):
            e = abs(den * x - num)
            ok &= p.alpha / Fraction(den) ** 2 <= e <= p.beta / Fraction(den) ** 2
    return ok


def separation_violations(xi, p: int, q: int, c, d) -> list[tuple[int, int]]:
    """Pairs (u, v) with 0 < v < d q^2, u/v != p/q and |v xi - u| < (1 - cd) sqrt(d) (d q^2)^-1/2.

    Requires |q xi - p| < c q^-2 and cd < 1.  The square root is avoided by
    comparing squares; only the two integers nearest v xi can violate.
    """
    xi, c, d = as_rational(xi), as_rational(c), as_rational(d)
    if not (c > 0 and d > 0 and c * d < 1):
        raise ValueError("need c, d > 0 and cd < 1")
    if not abs(q * xi - p) < c / Fraction(q) ** 2:
        raise ValueError("p/q is not close enough to xi")
    Q = d * q * q
    # (1 - cd)^2 d / Q = (1 - cd)^2 / q^2, compared over integers with xi = A/B, 1 - cd = E/F
    A, B = xi.numerator, xi.denominator
    e = 1 - c * d
    E, F = e.numerator, e.denominator
    rhs = (E * B) ** 2
    bad = []
    v = 1
    while v < Q:
        fl = v * A // B
        for u in (fl, fl + 1):
            if u * q != p * v and ((v * A - u * B) * q * F) ** 2 < rhs:
                bad.append((u, v))
        v += 1
    return bad


@dataclass
class RunResult:
    params: BuilderParams
    state: ConstructionState
    certificates: list[StepCertificate]
    status: str

    @property
    def xi(self) -> RatInterval:
        return self.state.I

    @property
    def zeta(self) -> RatInterval:
        return self.state.J

    def to_json(self) -> dict:
        steps = []
        for (quad, Q), (I, J) in zip(self.state.history, self.state.intervals[1:]):
            steps.append({**quad.as_dict(), "Qk": rat_str(Q), "I": I.to_json(), "J": J.to_json()})
        return {
            "params": self.params.to_json(),
            "status": self.status,
            "steps": steps,
            "certificates": [c.to_json() for c in self.certificates],
            "xi": self.xi.to_json(),
            "zeta": self.zeta.to_json(),
        }


def run(p: BuilderParams, threads: int = 1) -> RunResult:
    bad = validate_params(p)
    if bad:
        raise ValueError("invalid parameters: " + "; ".join(bad))
    state = ConstructionState.initial(p)
    for _ in range(p.steps):
        state = step(state, p, threads)
    if p.steps < 2:
        return RunResult(p, state, [], "no certifiable level (certifying level k needs k+2 steps)")
    certs = [certify(state, k, p, threads) for k in range(p.steps - 1)]
    return RunResult(p, state, certs, "certified")


def params_from_optimizer(m: int, tau, rho=Fraction(1, 2), steps: int = 4, **kw) -> BuilderParams:
    """Rationalized optimizer output (d, beta) with alpha = rho * beta."""
    from .optimize import solve

    tau, rho = as_rational(tau), as_rational(rho)
    r = solve(m, tau=tau, rho=rho)
    d = Fraction(str(r.d_star)).limit_denominator(10**6)
    beta = Fraction(str(r.beta_star)).limit_denominator(10**6)
    p = BuilderParams(m, tau, d, rho * beta, beta, steps, **kw)
    if validate_params(p):
        # the rationalized optimum can sit on a constraint boundary; back off slightly
        p = replace(p, beta=beta * (1 - Fraction(1, 10**6)), alpha=rho * beta * (1 - Fraction(1, 10**6)))
    return p
