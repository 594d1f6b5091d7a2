from __future__ import annotations

import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ulc.ratcore import cf_expand, non_canonical_twin
from ulc.zaremba import (
    ZarembaParams,
    density_report,
    is_Fm,
    is_prime,
    sieve_primes,
    zaremba_numerators,
)


def fm_oracle(u: int, q: int, m: int) -> bool:
    """Both finite expansions written out, each checked quotient by quotient."""
    w = cf_expand(F(u, q))
    return all(a <= m for a in w.quotients) or all(a <= m for a in non_canonical_twin(w).quotients)


def trial_division(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, math.isqrt(n) + 1))


class TestFm:
    @pytest.mark.parametrize("x, m, ok", [(F(1, 2), 2, True), (F(1, 2), 1, True), (F(3, 13), 2, False)])
    def test_fixtures(self, x, m, ok):
        assert is_Fm(x, m) is ok

    @pytest.mark.parametrize("x", [F(0), F(1), F(3, 2), F(-1, 3)])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            is_Fm(x, 3)

    @given(st.integers(2, 3000), st.integers(1, 8), st.data())
    def test_matches_oracle(self, q, m, data):
        u = data.draw(st.integers(1, q - 1))
        assert is_Fm(F(u, q), m) == fm_oracle(u // math.gcd(u, q), q // math.gcd(u, q), m)


class TestNumerators:
    def test_fixtures(self):
        assert zaremba_numerators(13, 2).numerators == (5, 8)
        assert zaremba_numerators(2, 2).numerators == (1,)
        # 1/13 = [0;13] has twin [0;12,1], so every residue qualifies at m = 12
        assert zaremba_numerators(13, 12).numerators == tuple(range(1, 13))

    def test_membership(self):
        zs = zaremba_numerators(13, 2)
        assert 5 in zs and 6 not in zs and len(zs) == 2

    def test_against_oracle_and_coprime(self):
        for q in range(2, 501):
            for m in (1, 2, 3, 5):
                got = zaremba_numerators(q, m).numerators
                want = tuple(u for u in range(1, q) if math.gcd(u, q) == 1 and fm_oracle(u, q, m))
                assert got == want, (q, m)

    def test_monotone_in_m(self):
        for q in range(2, 501):
            prev = set()
            for m in range(1, 11):
                cur = set(zaremba_numerators(q, m).numerators)
                assert prev <= cur
                prev = cur

    @pytest.mark.parametrize("m", [1, 2, 3, 5, 8])
    def test_split_equals_scan(self, m):
        for q in range(2, 2001, 7):
            assert zaremba_numerators(q, m, "split") == zaremba_numerators(q, m, "scan")

    def test_large_prime_fast(self):
        zs = zaremba_numerators(1000003, 5)
        assert len(zs) > 0
        for u in zs.numerators[:: max(1, len(zs) // 50)]:
            assert fm_oracle(u, 1000003, 5)

    def test_sum_growth(self):
        total, prev = 0, 0
        for Q in range(2, 400):
            total += len(zaremba_numerators(Q, 2))
            assert total >= prev and total > 0
            prev = total

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            zaremba_numerators(1, 2)
        with pytest.raises(ValueError):
            zaremba_numerators(10, 2, "bogus")


class TestPrimes:
    def test_fixtures(self):
        assert sieve_primes(2, 10) == [2, 3, 5, 7]
        assert sieve_primes(90, 100) == [97]
        assert sieve_primes(10**4, 10**4 + 50) == [10007, 10009, 10037, 10039]

    def test_against_trial_division(self):
        assert sieve_primes(2, 10**5) == [n for n in range(2, 10**5 + 1) if trial_division(n)]

    def test_segmented_window(self):
        lo, hi = 10**9 - 2000, 10**9
        assert sieve_primes(lo, hi) == [n for n in range(lo, hi + 1) if is_prime(n)]

    @given(st.integers(0, 10**6))
    def test_is_prime(self, n):
        assert is_prime(n) == trial_division(n)


class TestDensity:
    def test_report_shape(self):
        r = density_report(100, F(1, 2), 5, F(3, 10))
        assert [q for q, _, _ in r.rows] == sieve_primes(50, 100)
        assert 0 <= r.density <= 1
        assert all(c == len(zaremba_numerators(q, 5)) for q, c, _ in r.rows)
        js = r.to_json()
        assert set(js) >= {"T", "gamma", "m", "sigma", "primes", "density"}

    def test_sigma_zero(self):
        r = density_report(200, F(1, 2), 3, 0)
        assert r.density == 1

    def test_m1_rare(self):
        r = density_report(100, F(1, 2), 1, F(99, 100))
        assert r.density == 0

    def test_threads_do_not_matter(self):
        a = density_report(400, F(1, 2), 3, F(1, 2), threads=1).to_json()
        b = density_report(400, F(1, 2), 3, F(1, 2), threads=3).to_json()
        assert a == b

    def test_params_sigma(self):
        p = ZarembaParams.from_delta(2, F(53, 100))
        assert p.sigma == 2 * F(53, 100) - F(1001, 1000)

    def test_rejects_bad_gamma(self):
        with pytest.raises(ValueError):
            density_report(100, F(3, 2), 2, 0)
