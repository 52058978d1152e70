"""Snapped-constant and log-space scalar tests.

The logarithm oracle here is an integer-arithmetic atanh series, fully
independent of the mpmath-backed implementation: ln(q) is reduced by
powers of two into [1, 2) and the remainder summed as
2*atanh((r-1)/(r+1)) term by term in exact rationals.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailkit.numerics import (LogValue, exp2_snap, ln_snap, log2_snap,
                              log_nat, lv_add, lv_cmp, lv_mul, root_snap)


def _atanh_series(z: Fraction, bits: int) -> Fraction:
    total = Fraction(0)
    power = z
    z2 = z * z
    k = 0
    floor = Fraction(1, 1 << (bits + 8))
    while power > floor:
        total += power / (2 * k + 1)
        power *= z2
        k += 1
    return total


def ln_oracle(q: Fraction, bits: int) -> Fraction:
    """ln(q) for q > 0 via argument reduction plus the atanh series."""
    q = Fraction(q)
    assert q > 0
    shift = 0
    while q >= 2:
        q /= 2
        shift += 1
    while q < 1:
        q *= 2
        shift -= 1
    ln2 = 2 * _atanh_series(Fraction(1, 3), bits + 8)
    z = (q - 1) / (q + 1)
    return shift * ln2 + 2 * _atanh_series(z, bits + 8)


class TestLogNat:
    def test_ln2_against_series_oracle(self):
        lam = log_nat(1, 64)
        assert abs(lam - ln_oracle(Fraction(2), 96)) < Fraction(1, 1 << 63)
        assert abs(float(lam) - 0.6931471805599453) < 1e-15

    def test_ln3_against_series_oracle(self):
        lam = log_nat(2, 64)
        assert abs(lam - ln_oracle(Fraction(3), 96)) < Fraction(1, 1 << 63)
        assert abs(float(lam) - 1.0986122886681098) < 1e-15

    def test_precisions_agree(self):
        assert abs(log_nat(1, 32) - log_nat(1, 64)) <= Fraction(1, 1 << 32)

    def test_deterministic_and_cached(self):
        assert log_nat(7, 128) is log_nat(7, 128)
        assert log_nat(7, 128) == log_nat(7, 128)

    def test_monotone(self):
        values = [log_nat(n) for n in range(1, 200)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("bad", [0, -1, 2.5])
    def test_rejects_bad_n(self, bad):
        with pytest.raises(ValueError):
            log_nat(bad)

    def test_rejects_low_precision(self):
        with pytest.raises(ValueError):
            log_nat(1, 16)

    def test_huge_argument(self):
        # ln(floor(e^16) + 1) should sit within 1e-7 of 16
        lam = log_nat(8886110)
        assert abs(lam - 16) < Fraction(1, 10 ** 6)

    @given(st.integers(min_value=1, max_value=5000))
    @settings(max_examples=60, deadline=None)
    def test_error_bound_against_oracle(self, n):
        lam = log_nat(n, 64)
        assert abs(lam - ln_oracle(Fraction(n + 1), 96)) <= Fraction(1, 1 << 63)


class TestSnaps:
    def test_log2_exact_powers(self):
        assert log2_snap(Fraction(8)) == 3
        assert log2_snap(Fraction(1, 1024)) == -10

    def test_log2_matches_ln(self):
        q = Fraction(7, 3)
        expected = ln_oracle(q, 96) / ln_oracle(Fraction(2), 96)
        assert abs(log2_snap(q, 64) - expected) < Fraction(1, 1 << 62)

    def test_exp2_integer_exact(self):
        assert exp2_snap(Fraction(10)) == 1024
        assert exp2_snap(Fraction(-3)) == Fraction(1, 8)

    def test_exp2_log2_round_trip(self):
        q = Fraction(355, 113)
        back = exp2_snap(log2_snap(q, 128), 128)
        assert abs(back - q) < Fraction(1, 1 << 120)

    def test_root_exact_powers(self):
        assert root_snap(Fraction(4), 2) == 2
        assert root_snap(Fraction(27, 8), 3) == Fraction(3, 2)
        assert root_snap(Fraction(1), 6) == 1

    @given(st.fractions(min_value="1/1000", max_value=1000).filter(lambda q: q > 0),
           st.sampled_from([2, 3, 6]))
    @settings(max_examples=80, deadline=None)
    def test_root_snap_error(self, q, k):
        r = root_snap(q, k, 96)
        # |r^k - q| <= k * max(r, q)^(k-1) * 2^-96 within a safety factor
        scale = max(r, q, Fraction(1)) ** (k - 1)
        assert abs(r ** k - q) <= 4 * k * scale * Fraction(1, 1 << 96)

    def test_root_rejects_negative(self):
        with pytest.raises(ValueError):
            root_snap(Fraction(-1), 2)

    def test_ln_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ln_snap(Fraction(0))


class TestLogValue:
    def test_mul_powers_of_two(self):
        u = LogValue(1, Fraction(3))
        v = LogValue(1, Fraction(4))
        assert lv_mul(u, v) == LogValue(1, Fraction(7))

    def test_mul_zero_absorbs(self):
        assert lv_mul(LogValue(1, Fraction(10)), LogValue.zero()).sign == 0

    def test_mul_sign_rule(self):
        u = LogValue(-1, Fraction(-10))
        assert lv_mul(u, u) == LogValue(1, Fraction(-20))

    def test_add_equal_doubles(self):
        u = LogValue(1, Fraction(10))
        assert lv_add(u, u) == LogValue(1, Fraction(11))

    def test_add_zero_identity(self):
        u = LogValue(1, Fraction(0))
        assert lv_add(u, LogValue.zero()) == u

    def test_add_dominated_term(self):
        big = LogValue(1, Fraction(10000))
        one = LogValue(1, Fraction(0))
        assert lv_add(big, one) == big  # correction below resolution

    def test_add_never_shrinks_same_sign(self):
        u = LogValue(1, Fraction(5))
        v = LogValue(1, Fraction(3))
        assert lv_add(u, v).log2mag >= u.log2mag

    def test_opposite_exact_cancellation(self):
        u = LogValue(1, Fraction(7))
        v = LogValue(-1, Fraction(7))
        out = lv_add(u, v)
        assert out.sign == 0 and not out.precision_loss

    def test_opposite_near_cancellation_flags(self):
        u = LogValue(1, Fraction(0))
        v = LogValue(-1, Fraction(-1, 1 << 200))
        out = lv_add(u, v, precision_bits=256)
        assert out.precision_loss

    def test_flag_propagates_through_mul(self):
        tainted = LogValue(1, Fraction(1), precision_loss=True)
        assert lv_mul(tainted, LogValue(1, Fraction(2))).precision_loss

    def test_cmp(self):
        assert lv_cmp(LogValue(1, Fraction(3)), LogValue(1, Fraction(2))) == 1
        assert lv_cmp(LogValue(-1, Fraction(3)), LogValue(-1, Fraction(2))) == -1
        assert lv_cmp(LogValue.zero(), LogValue(1, Fraction(-99))) == -1

    def test_rejects_bad_sign(self):
        with pytest.raises(ValueError):
            LogValue(2, Fraction(0))

    @given(st.fractions(min_value="1/64", max_value=64).filter(lambda q: q != 0),
           st.fractions(min_value="1/64", max_value=64).filter(lambda q: q != 0))
    @settings(max_examples=120, deadline=None)
    def test_round_trip_mul_matches_rational(self, r, s):
        pb = 128
        u = LogValue.from_rational(r, pb)
        v = LogValue.from_rational(s, pb)
        back = lv_mul(u, v).to_rational(pb)
        assert abs(back - r * s) <= abs(r * s) * Fraction(1, 1 << 100)

    @given(st.fractions(min_value="1/64", max_value=64).filter(lambda q: q > 0),
           st.fractions(min_value="1/64", max_value=64).filter(lambda q: q > 0))
    @settings(max_examples=120, deadline=None)
    def test_round_trip_add_matches_rational(self, r, s):
        pb = 128
        u = LogValue.from_rational(r, pb)
        v = LogValue.from_rational(s, pb)
        back = lv_add(u, v, pb).to_rational(pb)
        assert abs(back - (r + s)) <= (r + s) * Fraction(1, 1 << 100)
