"""Knot family and density construction checks.

Expected values were derived by hand from the knot formulas (positions,
2-power values, linear crossings) or pinned from independent oracles
(trapezoid sums, float quadrature); identities hold exactly in rational
arithmetic and are asserted at zero tolerance.
"""

from fractions import Fraction

import pytest

from tailkit import notched
from tailkit.numerics import log2_snap, log_nat, root_snap


class TestMOf:
    @pytest.mark.parametrize("n,expected", [(1, 1), (5, 5), (12, 11), (24, 22)])
    def test_examples(self, n, expected):
        assert notched.m_of(n) == expected

    def test_exact_inequality_sweep(self):
        # sqrt(5/6)*n <= m < sqrt(5/6)*(n+1) + 1 via the squared forms
        for n in range(1, 10 ** 6 + 1):
            m = notched.m_of(n)
            assert 6 * m * m >= 5 * n * n
            assert 6 * (m - 1) * (m - 1) < 5 * (n + 1) * (n + 1)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            notched.m_of(0)


class TestKnots:
    def test_a_positions(self):
        assert notched.knot_position("a", 3) == 512
        assert notched.a_position(0) == 0

    def test_b1_value(self):
        b1 = notched.knot_position("b", 1)
        assert abs(float(b1) - 2.9609060278) < 1e-9

    def test_c2_value(self):
        c2 = notched.knot_position("c", 2)
        assert abs(float(c2) - 273.65559168650066) < 1e-9

    def test_knot_values_are_two_powers(self):
        for n in (1, 2, 5):
            expected = Fraction(2, 1 << (3 * n * n))
            assert notched.knot_value("a", n) == expected
            assert notched.knot_value("c", n) == expected

    def test_b_value_is_a_over_lambda_exactly(self):
        for n in (1, 2, 7):
            assert (notched.knot_value("b", n) * log_nat(n)
                    == notched.knot_value("a", n))

    def test_dense_limit_error_directs_to_logf(self):
        with pytest.raises(ValueError, match="knot_logf"):
            notched.knot_position("a", 65)
        assert notched.knot_logf("a", 65).log2mag == 1 - 3 * 65 * 65

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            notched.knot_position("z", 3)


class TestKnotLogf:
    def test_a4(self):
        lv = notched.knot_logf("a", 4)
        assert lv.sign == 1 and lv.log2mag == -47

    def test_c10(self):
        assert notched.knot_logf("c", 10).log2mag == -299

    def test_b9(self):
        lv = notched.knot_logf("b", 9)
        assert abs(float(lv.log2mag) - (-243.2032544727)) < 1e-9

    def test_d9_half_lambda(self):
        lv = notched.knot_logf("d", 9)
        assert abs(float(lv.log2mag) - (-242.6016272363)) < 1e-9

    def test_agrees_with_dense_eval(self, nd10):
        for n in (2, 5, 9):
            for kind in ("a", "b", "c"):
                x = notched.knot_position(kind, n)
                dense_log = log2_snap(nd10.dense.eval(x), 128)
                sym = notched.knot_logf(kind, n).log2mag
                assert abs(dense_log - sym) < Fraction(1, 1 << 100)


class TestBuild:
    def test_n1_knot_layout(self):
        nd = notched.build_density(1)
        assert len(nd.dense.coeffs) == 4
        approx = [0.0, 2.0, 2.9609060278, 9.4804530139, 16.0]
        for got, want in zip(nd.dense.breakpoints, approx):
            assert abs(float(got) - want) < 1e-9

    def test_segment_count_invariant(self):
        for n in (1, 2, 5, 8):
            nd = notched.build_density(n)
            assert len(nd.dense.coeffs) == 3 * n + 1

    def test_first_block_midpoint(self):
        nd = notched.build_density(1)
        assert nd.dense.eval(1) == Fraction(5, 8)

    def test_eval_at_a2(self, nd3):
        assert nd3.dense.eval(16) == Fraction(2, 16 ** 3)

    def test_b2_value(self, nd3):
        got = nd3.dense.eval(notched.knot_position("b", 2))
        assert abs(float(got) - 4.4445274737638546e-4) < 1e-15

    def test_mass_against_trapezoid_oracle(self, nd3):
        # independent trapezoid sum straight from the knot values
        pts = nd3.dense.breakpoints
        vals = [nd3.dense.eval(x) for x in pts]
        oracle = sum((f0 + f1) * (x1 - x0) / 2
                     for x0, x1, f0, f1 in zip(pts, pts[1:], vals, vals[1:]))
        assert nd3.mass == oracle
        assert abs(float(nd3.mass) - 4.5296) < 1e-2

    def test_mass_against_float_quadrature(self, nd3):
        total = 0.0
        pts = [float(x) for x in nd3.dense.breakpoints]
        for a, b in zip(pts, pts[1:]):
            n = 64
            h = (b - a) / n
            total += sum(
                (float(nd3.dense.eval(Fraction(a + i * h)))
                 + float(nd3.dense.eval(Fraction(a + (i + 1) * h)))) * h / 2
                for i in range(n))
        assert abs(total - float(nd3.mass)) < 1e-6 * total

    def test_normalized_mass_is_one(self, nd3):
        assert nd3.density().total_mass() == 1

    def test_omitted_tail_small(self, nd3):
        assert nd3.omitted_tail_bound() < Fraction(1, 1000) * nd3.mass

    def test_notch_identity_series(self, nd10):
        for n in range(2, 11):
            b = notched.knot_position("b", n)
            c = notched.knot_position("c", n)
            assert nd10.dense.eval(c) / nd10.dense.eval(b) == log_nat(n)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            notched.build_density(0)


class TestThresholds:
    def test_crossings_exact(self, nd3):
        d2, s2 = notched.threshold_knots(2)
        target = notched.knot_value("b", 2) * root_snap(log_nat(2), 2, 256)
        assert d2.f == target and s2.f == target
        assert nd3.dense.eval(d2.x) == d2.f
        assert nd3.dense.eval(s2.x) == s2.f

    def test_positions(self):
        d2, s2 = notched.threshold_knots(2)
        assert abs(float(d2.x) - 151.68193) < 1e-4
        assert abs(float(s2.x) - 284.60438) < 1e-4

    def test_ordering(self):
        for n in (2, 3, 7):
            d, s = notched.threshold_knots(n)
            b = notched.knot_position("b", n)
            c = notched.knot_position("c", n)
            a_next = notched.a_position(n + 1)
            assert b < d.x <= c <= s.x <= a_next

    def test_n1_unsupported(self):
        with pytest.raises(ValueError):
            notched.threshold_knots(1)


class TestSlopeSeparation:
    def test_decreasing_from_5(self, nd10):
        vals = [notched.slope_value_separation(nd10, n) for n in range(5, 11)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_finite_everywhere(self, nd10):
        for n in range(1, 11):
            assert notched.slope_value_separation(nd10, n) > 0
