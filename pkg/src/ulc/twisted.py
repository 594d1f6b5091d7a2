"""Going-up construction: given badly approximable zeta_1..zeta_k with

    prod_i ||s zeta_i|| >= C Psi(s) / s   for all s >= 1,

build xi by nested intervals so that at a sequence Q_k

    (Q Phi(Q) / Psi(Q)) * min_{0<n<=Q} ||n xi|| prod_i ||n zeta_i|| >= C / (6K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cfnum import CFNumber
from .evaluate import min_product
from .ratcore import RatInterval, ScaledInterval, rat_str, simplest_in
from .stepfn import ONE, StepFunctionSpec

SIXTH, THIRD = Fraction(1, 6), Fraction(1, 3)


class SearchCutoff(RuntimeError):
    pass


@dataclass(frozen=True)
class BadTupleSpec:
    components: tuple[CFNumber, ...]
    C: Fraction
    psi: StepFunctionSpec

    def to_json(self) -> dict:
        return {
            "components": [c.describe() for c in self.components],
            "C": rat_str(self.C),
            "psi": self.psi.describe(),
        }


def bad_constant(z: CFNumber, scan_to: int = 10**4) -> Fraction:
    """A constant C with s ||s z|| >= C for every s >= 1.

    With all partial quotients <= a, ||q_k z|| >= 1/((a+2) q_k) at convergents
    and best approximation carries this to every s.  The exact scan over
    s <= scan_to can only confirm it.
    """
    if z.is_rational:
        raise ValueError("a rational number is not badly approximable")
    floor = Fraction(1, z.quotient_bound + 2)
    scan = scan_min(z, scan_to)
    if scan < floor:
        raise AssertionError(f"scan value {scan} undercuts the analytic floor {floor}")
    return min(floor, scan)


def scan_min(z: CFNumber, scan_to: int) -> Fraction:
    """Exact lower bound for min_{s <= scan_to} s ||s z|| from a tight enclosure."""
    X = ScaledInterval(z.enclosure(Fraction(1, 4 * scan_to**3)))
    best = None
    for s in range(1, scan_to + 1):
        v = s * X.lower_num(s)
        if best is None or v < best:
            best = v
    return Fraction(best, X.d)


def bad_tuple(components, scan_to: int = 10**4) -> BadTupleSpec:
    """Product constant for independent components; Psi(s) = s^-(k-1)."""
    comps = tuple(components)
    C = Fraction(1)
    for z in comps:
        C *= bad_constant(z, scan_to)
    psi = ONE if len(comps) == 1 else StepFunctionSpec("power", (-(len(comps) - 1),))
    return BadTupleSpec(comps, C, psi)


# -- choice of Q and K ------------------------------------------------------------

def _first_exceeding(phi: StepFunctionSpec, q: int, cutoff: int) -> int:
    """Smallest t with Phi(t) > q, for nondecreasing Phi."""
    if not phi.nondecreasing:
        raise ValueError("Phi must be nondecreasing")
    try:
        t = phi.inverse(Fraction(q), cutoff)
    except ValueError as exc:
        raise SearchCutoff(str(exc)) from None
    while phi(t) <= q:
        t += 1
        if t > cutoff:
            raise SearchCutoff(f"Phi never exceeds {q} below {cutoff}")
    return t


def _weight_ok(psi: StepFunctionSpec, Q: int, K, running_min: Fraction) -> bool:
    return psi(Q) <= K * running_min


def choose_Q(q: int, phi: StepFunctionSpec, psi: StepFunctionSpec, K=1, cutoff: int = 10**7) -> int:
    """Smallest Q with Phi(Q) > q and Psi(Q) <= K * min_{t<=Q} Psi(t)."""
    Q0 = _first_exceeding(phi, q, cutoff)
    if psi.nonincreasing and K >= 1:
        return Q0
    run = min(psi(t) for t in range(1, Q0 + 1))
    Q = Q0
    while not _weight_ok(psi, Q, K, run):
        Q += 1
        if Q > cutoff:
            raise SearchCutoff(f"no Q <= {cutoff} satisfies Psi(Q) <= {K} min Psi")
        run = min(run, psi(Q))
    return Q


def choose_K(psi: StepFunctionSpec, Q_from: int, Q_to: int, max_power: int = 64) -> Fraction:
    """1 for nonincreasing Psi, else the least power of two that some Q in range satisfies."""
    if psi.nonincreasing:
        return Fraction(1)
    run = min(psi(t) for t in range(1, Q_from + 1))
    ratios = []
    for Q in range(Q_from, Q_to + 1):
        run = min(run, psi(Q))
        ratios.append(psi(Q) / run)
    need = min(ratios)
    for e in range(max_power + 1):
        if need <= 2**e:
            return Fraction(2**e)
    raise SearchCutoff("no power of two works in the scan range")


# -- construction -------------------------------------------------------------------

@dataclass
class TwistedLevel:
    p: int
    q: int
    Q: int
    interval: RatInterval  # the next interval I_{k+1}

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "Q": self.Q, "I": self.interval.to_json()}


@dataclass
class TwistedTrace:
    I0: RatInterval
    levels: list[TwistedLevel] = field(default_factory=list)
    K: Fraction = Fraction(1)

    @property
    def enclosure(self) -> RatInterval:
        return self.levels[-1].interval if self.levels else self.I0


def level_window(p: int, q: int, Q: int) -> RatInterval:
    x = Fraction(p, q)
    return RatInterval(x + SIXTH / (q * Q), x + THIRD / (q * Q))


def _pick(I: RatInterval, phi, psi, K, cutoff) -> TwistedLevel:
    """Simplest p/q whose window fits strictly inside I.

    Candidates come from [I.lo, I.hi - margin]; the margin grows toward the
    full width until the window of the chosen fraction fits.
    """
    margin = I.width / 2
    for _ in range(400):
        x = simplest_in(I.lo, I.hi - margin)
        p, q = x.numerator, x.denominator
        Q = choose_Q(q, phi, psi, K, cutoff)
        W = level_window(p, q, Q)
        if I.strictly_contains(W):
            return TwistedLevel(p, q, Q, W)
        margin = (margin + I.width) / 2
    raise SearchCutoff("could not place the next interval")


def build(spec: BadTupleSpec, phi: StepFunctionSpec, levels: int,
          I0: RatInterval = RatInterval(Fraction(1, 10), Fraction(9, 10)),
          K=None, cutoff: int = 10**7) -> TwistedTrace:
    if not phi.nondecreasing or not phi.unbounded:
        raise ValueError("Phi must be nondecreasing and unbounded")
    if K is None:
        K = choose_K(spec.psi, 1, 4096)
    trace = TwistedTrace(I0, [], Fraction(K))
    I = I0
    for _ in range(levels):
        lvl = _pick(I, phi, spec.psi, trace.K, cutoff)
        if not I.strictly_contains(lvl.interval):
            raise AssertionError("nesting failed")
        trace.levels.append(lvl)
        I = lvl.interval
    return trace


@dataclass
class TwistedCertificate:
    k: int
    Q: int
    value: Fraction
    target: Fraction
    argmin_n: int
    case: str
    case_min: dict[str, tuple[Fraction, int] | None]

    @property
    def ok(self) -> bool:
        return self.value >= self.target

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "Q": self.Q,
            "value": rat_str(self.value),
            "value_approx": float(self.value),
            "target": rat_str(self.target),
            "argmin_n": self.argmin_n,
            "case": self.case,
            "cases": {
                c: None if v is None else {"value": rat_str(v[0]), "n": v[1]} for c, v in self.case_min.items()
            },
            "ok": self.ok,
        }


def _certify_once(trace, spec, phi, k, zeta_enc) -> TwistedCertificate:
    lvl = trace.levels[k]
    X = ScaledInterval(trace.enclosure)
    Zs = [ScaledInterval(Z) for Z in zeta_enc]
    den = X.d
    for Z in Zs:
        den *= Z.d
    best = {"multiple": None, "independent": None}
    for n in range(1, lvl.Q + 1):
        v = X.lower_num(n)
        for Z in Zs:
            v *= Z.lower_num(n)
        case = "multiple" if n % lvl.q == 0 else "independent"
        if best[case] is None or v < best[case][0]:
            best[case] = (v, n)
    scale = Fraction(lvl.Q) * phi(lvl.Q) / spec.psi(lvl.Q)
    case_min = {c: None if b is None else (scale * Fraction(b[0], den), b[1]) for c, b in best.items()}
    case, (value, arg) = min(((c, v) for c, v in case_min.items() if v is not None), key=lambda t: (t[1][0], t[1][1]))
    return TwistedCertificate(k, lvl.Q, value, spec.C / (6 * trace.K), arg, case, case_min)


def certify(trace: TwistedTrace, spec: BadTupleSpec, phi: StepFunctionSpec, k: int) -> TwistedCertificate:
    """Exact certificate for level k over the final xi enclosure and tight zeta enclosures."""
    Q = trace.levels[k].Q
    width = Fraction(1, Q**4)
    cert = _certify_once(trace, spec, phi, k, [z.enclosure(width) for z in spec.components])
    if not cert.ok:
        # one refinement of the zeta enclosures before giving up
        width = Fraction(1, Q**6 * 1000)
        cert = _certify_once(trace, spec, phi, k, [z.enclosure(width) for z in spec.components])
    return cert


def build_and_certify(spec: BadTupleSpec, phi: StepFunctionSpec, levels: int, **kw):
    trace = build(spec, phi, levels, **kw)
    certs = [certify(trace, spec, phi, k) for k in range(levels)]
    return trace, certs


def midpoint_value(trace: TwistedTrace, spec: BadTupleSpec, phi: StepFunctionSpec, k: int) -> Fraction:
    """Same quantity at the midpoint of the xi enclosure and convergents of each zeta."""
    lvl = trace.levels[k]
    pts = [trace.enclosure.mid] + [z.enclosure(Fraction(1, lvl.Q**4)).mid for z in spec.components]
    scale = Fraction(lvl.Q) * phi(lvl.Q) / spec.psi(lvl.Q)
    return scale * min_product(pts, lvl.Q).value


def trace_json(trace: TwistedTrace, spec: BadTupleSpec, phi: StepFunctionSpec, certs) -> dict:
    return {
        "spec": spec.to_json(),
        "phi": phi.describe(),
        "psi": spec.psi.describe(),
        "C": rat_str(spec.C),
        "K": rat_str(trace.K),
        "levels": [lv.to_json() for lv in trace.levels],
        "certificates": [c.to_json() for c in certs],
        "xi": trace.enclosure.to_json(),
    }


def window_separation_violations(q_max: int = 50) -> list[tuple]:
    """Exhaustive check of |s x - r| >= 1/(3q) for (r, s) not a multiple of (p, q).

    For each reduced p/q with q <= q_max and each Q in a few sizes, x runs over
    the endpoints and midpoint of [p/q + 1/(6qQ), p/q + 1/(3qQ)], and s over
    1..Q (so s |q x - p| <= 1/3).
    """
    bad = []
    for q in range(1, q_max + 1):
        for p in range(0, q + 1):
            if math.gcd(p, q) != 1:
                continue
            for Q in sorted({q, q + 1, 2 * q, q * q + 1}):
                W = level_window(p, q, Q)
                for x in (W.lo, W.mid, W.hi):
                    A, B = x.numerator, x.denominator
                    for s in range(1, Q + 1):
                        fl = s * A // B
                        for r in (fl, fl + 1):
                            if r * q == p * s:
                                continue  # (r, s) is a multiple of (p, q)
                            # |s x - r| < 1/(3q)  <=>  3q |sA - rB| < B
                            if 3 * q * abs(s * A - r * B) < B:
                                bad.append((p, q, Q, x, r, s))
    return bad
