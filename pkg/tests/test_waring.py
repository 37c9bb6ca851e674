import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vinolab.counting import count_waring_representations
from vinolab.exceptions import PreconditionError
from vinolab.waring import (
    TYPO_REPAIR_NOTE,
    complete_exp_sum,
    eta_interpolation,
    gtilde_classical,
    gtilde_improved,
    gtilde_log,
    gtilde_report,
    local_factor,
    min_admissible_s0,
    singular_series,
    waring_main_term,
    wooley_reference_bound,
)


def e(t):
    return cmath.exp(2j * math.pi * t)


def classical_oracle(k):
    best = max(
        math.ceil(Fraction(j * k - 2**j, k + 1 - j))
        for j in range(1, k)
        if 2**j <= k * k and j * k - 2**j >= 0
    )
    return k * k + 1 - best


def improved_oracle(k):
    best = max(
        math.ceil(Fraction(s * (k - s - 1), k - s + 1)) for s in range(1, k + 1) if s * (k - s - 1) >= 0
    )
    return k * k + 1 - best


class TestCompleteSum:
    def test_examples(self):
        assert complete_exp_sum(1, 1, 7) == pytest.approx(1)
        for q in (2, 5, 12):
            assert abs(complete_exp_sum(1, q, 1)) < 1e-12
        assert complete_exp_sum(1, 3, 2) == pytest.approx((1 + 2 * e(1 / 3)) / 3)

    def test_gcd_violation(self):
        with pytest.raises(PreconditionError):
            complete_exp_sum(2, 4, 2)

    @pytest.mark.parametrize("a, q, k", [(3, 7, 3), (5, 12, 2), (1, 9, 4)])
    def test_against_loop(self, a, q, k):
        ref = sum(e(a * r**k / q) for r in range(1, q + 1)) / q
        assert complete_exp_sum(a, q, k) == pytest.approx(ref, abs=1e-12)

    def test_gauss_sum_magnitude(self):
        # |G(a, p)| = sqrt(p) for odd primes
        for p in (3, 7, 11, 13):
            assert abs(complete_exp_sum(1, p, 2)) == pytest.approx(1 / math.sqrt(p))


class TestSingularSeries:
    @pytest.mark.parametrize("n, s", [(1, 1), (17, 3), (1000, 5)])
    def test_k1_is_one(self, n, s):
        assert singular_series(n, s, 1, 50).value == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("k, s, n", [(2, 3, 14), (2, 4, 7), (3, 4, 30)])
    def test_multiplicative_local_factors(self, k, s, n):
        for q1 in range(2, 31):
            for q2 in range(2, 31 // q1 + 1):
                if math.gcd(q1, q2) == 1:
                    lhs = local_factor(q1 * q2, n, s, k)
                    rhs = local_factor(q1, n, s, k) * local_factor(q2, n, s, k)
                    assert abs(lhs - rhs) <= 1e-9

    def test_sum_of_local_factors(self):
        ss = singular_series(50, 4, 2, 12)
        assert ss.value == pytest.approx(sum(local_factor(q, 50, 4, 2) for q in range(1, 13)).real)

    def test_tail_flag_divergent(self):
        assert singular_series(10**4, 2, 2, 100).tail_flag

    def test_tail_flag_convergent(self):
        assert not singular_series(10**4, 9, 2, 100).tail_flag

    def test_positive_for_five_squares(self):
        ss = singular_series(10**4, 5, 2, 100)
        assert 0.5 < ss.value < 2.0


class TestMainTerm:
    def test_compositions(self):
        assert waring_main_term(100, 3, 1, 10) == pytest.approx(5000)
        assert abs(waring_main_term(100, 3, 1, 10) - math.comb(99, 2)) / math.comb(99, 2) < 0.05

    def test_rejects(self):
        with pytest.raises(PreconditionError):
            waring_main_term(0, 3, 1, 10)
        with pytest.raises(PreconditionError):
            waring_main_term(100, 2, 2, 10)

    def test_five_squares_near_exact(self):
        n = 9999
        exact = count_waring_representations(n, 5, 2)
        assert abs(waring_main_term(n, 5, 2, 200) - exact) / exact < 0.15


class TestGtilde:
    @pytest.mark.parametrize("k, expected", [(4, 15), (5, 23), (6, 34), (7, 47), (8, 61)])
    def test_classical_table(self, k, expected):
        assert gtilde_classical(k) == expected

    def test_classical_consequences(self):
        for k in range(5, 60):
            assert gtilde_classical(k) <= k * k - 2
        for k in range(8, 60):
            assert gtilde_classical(k) <= k * k - 3

    @pytest.mark.parametrize("k", range(3, 201))
    def test_classical_oracle_and_log(self, k):
        assert gtilde_classical(k) == classical_oracle(k)
        assert gtilde_classical(k) <= gtilde_log(k)

    def test_log_examples(self):
        assert gtilde_log(4) == 15
        assert gtilde_log(8) == 62
        assert gtilde_log(1024) == 1048577 - 10
        assert gtilde_log(1023) == 1023**2 + 1 - 9

    @pytest.mark.parametrize("k, expected", [(3, 9), (4, 16), (13, 164)])
    def test_improved_examples(self, k, expected):
        assert gtilde_improved(k) == expected

    @pytest.mark.parametrize("k", range(3, 120))
    def test_improved_oracle(self, k):
        assert gtilde_improved(k) == improved_oracle(k)

    def test_improved_beats_classical_beyond_12(self):
        for k in range(13, 51):
            assert gtilde_improved(k) < gtilde_classical(k)

    @pytest.mark.parametrize("k", [100, 200, 500, 1000])
    def test_improved_asymptotic(self, k):
        assert gtilde_improved(k) <= k * k - k + 8 * math.sqrt(k)

    @pytest.mark.parametrize("k", [2, 0])
    def test_domain(self, k):
        for fn in (gtilde_classical, gtilde_log, gtilde_improved):
            with pytest.raises(PreconditionError):
                fn(k)

    def test_report(self):
        rep = gtilde_report(13)
        assert (rep.bound_classical, rep.bound_log, rep.bound_improved) == (166, 167, 164)
        assert rep.maximizer_improved == 8
        assert 1 <= rep.maximizer_classical <= 12 and 2**rep.maximizer_classical <= 169
        assert TYPO_REPAIR_NOTE in rep.notes

    @pytest.mark.parametrize("k", range(3, 40))
    def test_report_invariants(self, k):
        rep = gtilde_report(k)
        assert max(rep.bound_classical, rep.bound_log, rep.bound_improved) <= k * k + 1
        assert 1 <= rep.maximizer_improved <= k


class TestInterpolation:
    def test_endpoints(self):
        p = eta_interpolation(110, 5, 10)
        assert p.a == 0 and p.eta == 11
        p = eta_interpolation(30, 5, 10)
        assert p.a == 1 and p.eta == 5

    def test_example(self):
        p = eta_interpolation(80, 5, 10)
        assert p.a == Fraction(3, 8) and p.eta == Fraction(35, 4)

    def test_range(self):
        with pytest.raises(PreconditionError):
            eta_interpolation(29, 5, 10)
        with pytest.raises(PreconditionError):
            eta_interpolation(80, 10, 10)

    @settings(max_examples=200)
    @given(k=st.integers(3, 60), data=st.data())
    def test_eta_exceeds_k_iff_admissible(self, k, data):
        s = data.draw(st.integers(1, k - 1))
        s0 = data.draw(st.integers(s * (s + 1), k * (k + 1)))
        p = eta_interpolation(s0, s, k)
        assert 0 <= p.a <= 1
        # eta > k is the admissibility condition that min_admissible_s0 encodes
        assert (p.eta > k) == (s0 >= min_admissible_s0(s, k))

    def test_min_admissible_examples(self):
        assert min_admissible_s0(8, 13) == 164
        assert min_admissible_s0(2, 4) == 16
        for k in (4, 9, 20):
            assert min_admissible_s0(k - 1, k) == k * k + 1

    @pytest.mark.parametrize("k", range(3, 51))
    def test_min_admissible_reproduces_improved(self, k):
        assert min(min_admissible_s0(s, k) for s in range(1, k)) == gtilde_improved(k)


class TestWooley:
    def test_table(self):
        assert wooley_reference_bound(5).value == 28
        assert wooley_reference_bound(6).value == 43
        assert wooley_reference_bound(7).value == 61
        assert not wooley_reference_bound(6).approximate

    def test_asymptotic_line(self):
        rep = wooley_reference_bound(100)
        assert rep.value == pytest.approx(15407.0) and rep.approximate

    def test_domain(self):
        with pytest.raises(PreconditionError):
            wooley_reference_bound(4)


def test_k11_k12_comparison_is_recorded():
    # under the repaired reading the improved bound already wins at k = 11 and 12
    assert [gtilde_improved(k) - gtilde_classical(k) for k in (11, 12)] == [-1, -1]
    assert all(gtilde_improved(k) >= gtilde_classical(k) for k in range(3, 11))
