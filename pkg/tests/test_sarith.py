from __future__ import annotations

import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ulc.cfnum import CFNumber
from ulc.ratcore import RatInterval, ScaledInterval, nearest_dist_lower
from ulc.sarith import (
    Inconclusive,
    PadicParams,
    SSpec,
    build_padic,
    build_s_twisted,
    candidate_upper,
    certify_padic,
    certify_s_twisted,
    padic_run,
    s_norm,
    scan_enclosure,
    singleton_scan,
    valuation,
    weighted_min_loop,
    weighted_min_lower,
)
from ulc.stepfn import StepFunctionSpec

SQRT = StepFunctionSpec.parse("sqrt")


class TestSNorm:
    @pytest.mark.parametrize(
        "q, S, v",
        [
            (12, SSpec.include(2), F(1, 4)),
            (12, SSpec.include(2, 3), F(1, 12)),
            (12, SSpec.include(5), F(1)),
            (12, SSpec.exclude(3), F(1, 4)),
            (-45, SSpec.exclude(), F(1, 45)),
            (7, SSpec.exclude(7), F(1)),
        ],
    )
    def test_fixtures(self, q, S, v):
        assert s_norm(q, S) == v

    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            s_norm(0, SSpec.include(2))

    @pytest.mark.parametrize("text", ["include:", "include:4", "exclude:3,3", "mixed:3"])
    def test_bad_specs(self, text):
        with pytest.raises((ValueError, KeyError)):
            SSpec.parse(text)

    def test_parse(self):
        assert SSpec.parse("exclude_finite:3") == SSpec.exclude(3)
        assert 5 in SSpec.parse("include:3,5") and 5 not in SSpec.parse("exclude:5")

    def test_product_formula(self):
        # |q| times the norm over every prime factor of q is 1, and matches the empty exclude list
        rng = random.Random(4)
        for _ in range(10**4):
            q = rng.randint(2, 10**4)
            factors = [p for p in range(2, q + 1) if q % p == 0 and all(p % d for d in range(2, math.isqrt(p) + 1))]
            assert q * s_norm(q, SSpec.include(*factors)) == 1
            assert s_norm(q, SSpec.include(*factors)) == s_norm(q, SSpec.exclude())

    @given(st.integers(1, 10**4), st.integers(1, 10**4), st.sampled_from(
        [SSpec.include(2), SSpec.include(3, 5), SSpec.exclude(3), SSpec.exclude(2, 7)]))
    def test_multiplicative(self, a, b, S):
        assert s_norm(a * b, S) == s_norm(a, S) * s_norm(b, S)

    @given(st.integers(1, 10**4))
    def test_include_times_exclude(self, q):
        # S and its complement partition the primes: |q|_S |q|_{S^c} = 1/|q|
        assert s_norm(q, SSpec.include(3, 5)) * s_norm(q, SSpec.exclude(3, 5)) == F(1, q)

    @given(st.integers(1, 10**6))
    def test_include_three_trivial_off_three(self, q):
        if q % 3:
            assert s_norm(q, SSpec.include(3)) == 1


class TestGroupedMin:
    @settings(max_examples=150, deadline=None)
    @given(st.fractions(min_value=0, max_value=1, max_denominator=10**4), st.integers(0, 100),
           st.integers(1, 400), st.sampled_from([(2,), (3,), (2, 3), (3, 5), (2, 5, 7)]))
    def test_matches_loop(self, lo, w, N, primes):
        X = RatInterval(lo, lo + F(w, 10**6))
        got, arg = weighted_min_lower(X, N, primes)
        want, _ = weighted_min_loop(X, N, SSpec.include(*primes))
        assert got == want
        assert nearest_dist_lower(X, arg) * s_norm(arg, SSpec.include(*primes)) == got


class TestPadic:
    @pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
    def test_values_in_range(self, p):
        levels, certs = padic_run(PadicParams(p, (F(1, 10),), 3))
        for c in certs:
            assert F(4, 5) <= c.value <= 1 and c.ok

    @pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
    def test_schedule_increasing(self, p):
        _, certs = padic_run(PadicParams(p, (F(1, 10), F(1, 20), F(1, 40)), 3))
        vals = [c.value for c in certs]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert all(c.value >= c.floor for c in certs)

    def test_digits_and_nesting(self):
        levels = build_padic(PadicParams(3, (F(1, 10),), 5))
        for lv in levels:
            assert lv.u % 3 and lv.Q == 3**lv.a - 1
            assert F(lv.u, 3**lv.a) in lv.interval
        for a, b in zip(levels, levels[1:]):
            assert a.interval.strictly_contains(b.interval) and a.a < b.a

    def test_against_loop(self):
        levels, certs = padic_run(PadicParams(2, (F(1, 10),), 3))
        enc = build_padic(PadicParams(2, (F(1, 10),), 4))[-1].interval
        for c in certs[:2]:
            v, _ = weighted_min_loop(enc, c.Q, SSpec.include(2))
            assert c.value == c.Q * v

    def test_enclosure_outside_is_inconclusive(self):
        levels = build_padic(PadicParams(2, (F(1, 10),), 2))
        with pytest.raises(Inconclusive):
            certify_padic(RatInterval(F(0), F(1)), levels, 1, 2)

    @pytest.mark.parametrize("args", [(4, (F(1, 10),), 2), (2, (F(1, 2),), 2), (2, (F(1, 10),), 0)])
    def test_bad_params(self, args):
        with pytest.raises(ValueError):
            PadicParams(*args)


@pytest.fixture(scope="module")
def run():
    S = SSpec.include(3, 5)
    levels = build_s_twisted(S, 2, SQRT, 4)
    enc = levels[-1].interval
    return S, levels, [certify_s_twisted(enc, levels, k, S, SQRT) for k in range(3)]


class TestSTwisted:
    def test_values(self, run):
        _, _, certs = run
        for c in certs:
            assert c.value >= F(1, 3) and c.ok

    def test_multiple_case(self, run):
        _, levels, certs = run
        for c, lv in zip(certs, levels):
            if "multiple" in c.cases:
                m = c.cases["multiple"]
                assert F(m["value"]) >= SQRT(lv.Q) / 6 and m["ok"]
                assert m["s"] % 2**lv.a == 0

    def test_levels(self, run):
        _, levels, _ = run
        for lv in levels:
            assert lv.p % 2 and lv.Q == SQRT.inverse(2**lv.a)
        for a, b in zip(levels, levels[1:]):
            assert a.interval.strictly_contains(b.interval)

    def test_small_level_exhaustive(self, run):
        S, levels, certs = run
        enc = levels[-1].interval
        lv = levels[0]
        sx = ScaledInterval(enc)
        direct = min(F(sx.lower_num(s), sx.d) * s_norm(s, S) for s in range(1, lv.Q + 1))
        assert certs[0].value == lv.Q * SQRT(lv.Q) * direct

    def test_include_three(self):
        S = SSpec.include(3)
        levels = build_s_twisted(S, 2, SQRT, 3)
        certs = [certify_s_twisted(levels[-1].interval, levels, k, S, SQRT) for k in range(2)]
        assert all(c.value >= F(1, 3) for c in certs)

    @pytest.mark.parametrize("S, base", [(SSpec.include(2, 3), 2), (SSpec.exclude(3), 2), (SSpec.include(3), 4)])
    def test_rejects(self, S, base):
        with pytest.raises(ValueError):
            build_s_twisted(S, base, SQRT, 2)


class TestSingleton:
    def test_rational(self):
        x = CFNumber.parse("0;2,3")  # 3/7
        rows = singleton_scan(x, 2, [1, 5, 7])
        assert [r.upper for r in rows] == [F(3, 7), F(1, 7), 0]
        assert all(r.lower == r.upper for r in rows)

    def test_sqrt2_decay(self):
        rows = singleton_scan(CFNumber.parse("sqrt2"), 3, [100, 10**4])
        assert rows[1].upper < rows[0].lower
        assert rows[1].upper < F(1, 100)
        assert all(r.exhaustive for r in rows)

    def test_enclosure_bounds(self):
        rows = singleton_scan(CFNumber.parse("golden"), 2, [10, 100, 1000])
        for r in rows:
            assert r.lower <= r.upper
            assert r.upper - r.lower <= r.Q * F(1, 4 * 1000**4)

    def test_monotone_running_min(self):
        rows = singleton_scan(CFNumber.parse("sqrt3"), 2, [50, 100, 200, 400])
        for a, b in zip(rows, rows[1:]):
            assert b.upper / b.Q <= a.upper / a.Q

    @pytest.mark.parametrize("name, p", [("sqrt2", 3), ("golden", 2), ("sqrt3", 2)])
    def test_candidate_set_agrees(self, name, p):
        xi = CFNumber.parse(name)
        Q = 3000
        row = singleton_scan(xi, p, [Q])[0]
        v, _ = candidate_upper(xi, p, Q, scan_enclosure(xi, Q))
        assert v == row.upper

    def test_beyond_exhaustive_is_upper_only(self):
        rows = singleton_scan(CFNumber.parse("sqrt2"), 3, [10**4, 10**6])
        assert rows[1].lower is None and not rows[1].exhaustive
        assert rows[1].upper / 10**6 <= rows[0].upper / 10**4
