"""Acceptance criteria, one test each, with a PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the lines also appear
in the terminal summary of a normal run.
"""

from __future__ import annotations

import json
import math
import random
import time
from contextlib import contextmanager
from fractions import Fraction as F

import pytest
from mpmath import mpf

from conftest import ACCEPTANCE_LINES
from ulc import builder, optimize, productset, sarith, twisted
from ulc.builder import params_from_optimizer, separation_violations
from ulc.cfnum import CFNumber
from ulc.cli import main
from ulc.evaluate import dmin
from ulc.ratcore import RatInterval, convergent_quality_violations, nearest_dist
from ulc.stepfn import StepFunctionSpec
from ulc.witness import SearchConfig, find_witnesses, verify_witness

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(num: int, title: str, budget_s: float):
    """Runs the body, checks the time budget, records one PASS/FAIL line."""
    notes: list[str] = []
    t0 = time.perf_counter()
    status = "FAIL"
    try:
        yield notes
        elapsed = time.perf_counter() - t0
        if elapsed > budget_s:
            notes.append(f"over time budget {budget_s}s")
            raise AssertionError(f"criterion {num} took {elapsed:.1f}s > {budget_s}s")
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        detail = "; ".join(notes)
        line = f"criterion {num:2d} {status}  {title} ({elapsed:.2f}s){': ' + detail if detail else ''}"
        ACCEPTANCE_LINES.append(line)
        print(line)


def check(notes: list[str], ok: bool, what: str) -> bool:
    if not ok:
        notes.append(f"failed: {what}")
    return ok


def cli_json(argv, tmp_path, name):
    path = tmp_path / name
    code = main(argv + ["--out", str(path)])
    return code, path.read_bytes()


def test_01_optimized_constant(tmp_path):
    with criterion(1, "optimizer reproduces the m=50 constant", 1.0) as notes:
        code, raw = cli_json(["optimize", "--m", "50"], tmp_path, "o.json")
        js = json.loads(raw)
        bound, d, beta = mpf(js["bound"]), mpf(js["d_star"]), mpf(js["beta_star"])
        notes.append(f"bound={float(bound):.8f} d*={float(d):.7f} beta*={float(beta):.5f}")
        assert code == 0
        assert bound > mpf("0.005326") and bound > mpf(1) / 188
        assert abs(d - mpf("0.01465")) < mpf("1e-4")
        assert abs(beta - mpf("27.1023")) < mpf("1e-2")


def test_02_conditional_constants():
    with criterion(2, "conditional constants for small m", 10.0) as notes:
        b2 = optimize.solve(2).bound
        b5 = optimize.solve(5).bound
        sweep_ok = True
        prev = None
        for m in range(2, 61):
            b = optimize.solve(m, grid=120).bound
            sweep_ok &= b > mpf(1) / (4 * (m + 2))
            sweep_ok &= prev is None or b < prev
            prev = b
        notes.append(f"solve(2)={float(b2):.6f} solve(5)={float(b5):.6f}")
        ok = check(notes, mpf(1) / 15 < b2 < mpf("0.07"), "solve(2) in (1/15, 0.07)")
        ok &= check(notes, sweep_ok, "solve(m) > 1/(4(m+2)) and decreasing on 2..60")
        ok &= check(notes, b5 > mpf("0.0414"), f"solve(5) > 0.0414 (got {float(b5):.6f})")
        assert ok, notes


def test_03_witnesses_at_desk_scale():
    with criterion(3, "witness search m=5, tau=3/2, primes in [50, 10^4]", 60.0) as notes:
        I = RatInterval(F(1, 5), F(4, 5))
        cfg = SearchConfig(I, I, F(3, 2), 5, 50, 10**4, max_witnesses=50)
        certs = find_witnesses(cfg)
        notes.append(f"{len(certs)} witnesses, first {certs[0].quadruple if certs else None}")
        assert certs
        for c in certs:
            assert c.ok and verify_witness(c.quadruple, I, I, F(3, 2), 5).ok


def test_04_construction_certificates():
    with criterion(4, "4-step builder run, m=5, tau=3/2", 300.0) as notes:
        p = params_from_optimizer(5, F(3, 2), steps=4)
        res = builder.run(p)
        ks = [c.k for c in res.certificates]
        assert ks == [0, 1, 2], ks
        for c in res.certificates:
            quad, Q = res.state.history[c.k]
            N = math.floor(Q)
            mid = builder.midpoint_value(res.state, c.k)
            assert isinstance(c.certified_lower, F) and c.certified_lower > 0
            assert c.certified_lower <= mid
            assert sum(c.counts.values()) == N
        notes.append("levels 0..2 lower=" + ", ".join(f"{float(c.certified_lower):.3e}" for c in res.certificates))


def test_05_product_set_exceptional():
    with criterion(5, "exceptional set fixture and prime sweep [50, 300]", 120.0) as notes:
        fx = productset.exceptional_set(productset.ProductSetInstance(13, frozenset({5, 8}), 3, 6))
        assert fx.E == (2, 3, 5, 8, 10, 11) and fx.card == 6
        reports = productset.sweep(50, 300, 5)
        worst = max(r["max_vinogradov_ratio"] for r in reports)
        notes.append(f"{len(reports)} primes, worst ratio {worst:.4f}")
        assert worst <= 1 + 1e-6
        assert all(r["window_count"] == 0 for r in reports)


def test_06_exact_separation_suites():
    with criterion(6, "separation, convergent quality and window suites", 60.0) as notes:
        rng = random.Random(61)
        sep = 0
        for _ in range(1000):
            q = rng.randint(1, 40)
            p = rng.randint(0, q)
            c = F(rng.randint(1, 40), 20)
            d = F(rng.randint(1, 99), 100) / c
            xi = F(p, q) + rng.choice((-1, 1)) * F(rng.randint(0, 999), 1000) * c / q**3
            sep += len(separation_violations(xi, p, q, c, d))
        conv = 0
        for _ in range(1000):
            conv += len(convergent_quality_violations(F(rng.randint(0, 10**5), rng.randint(1, 10**5))))
        win = len(twisted.window_separation_violations(50))
        notes.append(f"violations: separation={sep} convergents={conv} window={win}")
        assert sep == conv == win == 0


def test_07_padic():
    with criterion(7, "p-adic construction for p = 2, 3", 60.0) as notes:
        for p in (2, 3):
            _, certs = sarith.padic_run(sarith.PadicParams(p, (F(1, 10),), 3))
            assert all(F(4, 5) <= c.value <= 1 for c in certs)
            _, sched = sarith.padic_run(sarith.PadicParams(p, (F(1, 10), F(1, 20), F(1, 40)), 3))
            vals = [c.value for c in sched]
            assert all(a < b for a, b in zip(vals, vals[1:]))
            notes.append(f"p={p}: " + ", ".join(f"{float(v):.5f}" for v in vals))


def test_08_s_twisted():
    with criterion(8, "S-twisted construction, S={3,5}, base 2, Phi=sqrt", 120.0) as notes:
        S, phi = sarith.SSpec.include(3, 5), StepFunctionSpec.parse("sqrt")
        levels = sarith.build_s_twisted(S, 2, phi, 4)
        enc = levels[-1].interval
        certs = [sarith.certify_s_twisted(enc, levels, k, S, phi) for k in range(3)]
        for c, lv in zip(certs, levels):
            assert c.value >= F(1, 3)
            if "multiple" in c.cases:
                assert F(c.cases["multiple"]["value"]) >= phi(lv.Q) / 6
        notes.append("values " + ", ".join(f"{float(c.value):.4g}" for c in certs))


def test_09_singleton_decay():
    with criterion(9, "decay for sqrt(2) with 3 excluded", 120.0) as notes:
        lo, hi = sarith.singleton_scan(CFNumber.parse("sqrt2"), 3, [100, 10**4])
        notes.append(f"f(100) >= {float(lo.lower):.6g}, f(10^4) <= {float(hi.upper):.6g}")
        assert hi.upper < lo.lower
        assert hi.upper < F(1, 100)


def test_10_going_up():
    with criterion(10, "going-up construction for the golden ratio", 120.0) as notes:
        spec = twisted.bad_tuple([CFNumber.parse("golden")])
        assert spec.C >= F(1, 3)
        _, certs = twisted.build_and_certify(spec, StepFunctionSpec.parse("id"), 3)
        assert all(c.value >= F(1, 18) for c in certs)
        notes.append("values " + ", ".join(f"{float(c.value):.4f}" for c in certs))


def test_11_evaluator():
    with criterion(11, "evaluator fixture and naive-loop agreement", 30.0) as notes:
        assert dmin([F(2, 7), F(3, 5)], 4) == F(4, 35)
        rng = random.Random(11)
        for _ in range(1000):
            xs = [F(rng.randint(0, 999), rng.randint(1, 1000)) for _ in range(2)]
            Q = rng.randint(1, 100)
            naive = Q * min(nearest_dist(n * xs[0]) * nearest_dist(n * xs[1]) for n in range(1, Q + 1))
            assert dmin(xs, Q) == naive
        notes.append("1000 random pairs agree")


COMMANDS = [
    ["optimize", "--m", "50"],
    ["witness", "--m", "5", "--tau", "3/2", "--range", "50:10000", "--I", "1/5:4/5", "--J", "1/5:4/5", "--max", "10"],
    ["build", "--m", "5", "--tau", "3/2", "--steps", "4"],
    ["productset", "--sweep", "50:300"],
    ["sarith", "padic", "--p", "3", "--beta", "1/10,1/20,1/40"],
    ["sarith", "twisted"],
    ["sarith", "scan", "--Q", "100,10000"],
    ["twisted", "--levels", "3"],
    ["eval", "--x", "2/7,3/5", "--Q", "4"],
    ["zaremba", "--q", "13", "--m", "2"],
]


def test_12_determinism(tmp_path):
    with criterion(12, "byte-identical output for --threads 1 and 8", 600.0) as notes:
        differ = []
        for i, argv in enumerate(COMMANDS):
            runs = [cli_json(argv + ["--threads", str(t)], tmp_path, f"c{i}_{t}.json") for t in (1, 8)]
            assert runs[0][0] == runs[1][0] == 0, (argv, runs[0][0], runs[1][0])
            if runs[0][1] != runs[1][1]:
                differ.append(argv[0])
        notes.append(f"{len(COMMANDS)} commands compared" + (f", differing: {differ}" if differ else ""))
        assert not differ


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
