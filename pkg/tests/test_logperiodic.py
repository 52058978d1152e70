"""Log-periodic density checks.

Point values are verified against evaluation at twice the working
precision; normalizers are cross-checked with mpmath's own quadrature
(tanh-sinh, panelled at the anchors) as an independent second algorithm.
The pinned normalizer constant below was computed once at quad_tol 1e-8
and frozen.
"""

from fractions import Fraction

import mpmath
import pytest

from tailkit import logperiodic as lp
from tailkit import notched
from tailkit import convolution as conv
from tailkit import probes
from tailkit.errors import PrecisionFailure

# frozen from the adaptive-Simpson engine at tol 1e-8, alpha=1, delta=1/4;
# the mpmath.quad cross-check below re-derives it independently
PINNED_A = Fraction("0.1699929587")
PINNED_B = Fraction("2.0437349750")


def _quad_oracle_inv_a(p, x_max: float) -> mpmath.mpf:
    with mpmath.workprec(160):
        delta = mpmath.mpf(p.delta.numerator) / p.delta.denominator

        def f(y):
            if y <= 0:
                return mpmath.mpf(1)
            e = mpmath.mpf(1) / 2 + delta * mpmath.cos(mpmath.log(y + 1))
            return mpmath.exp(-mpmath.exp(e * mpmath.log(y)))

        pts = [mpmath.mpf(0)]
        k = 1
        while True:
            a = mpmath.exp(k * mpmath.pi) - 1
            if a >= x_max:
                break
            pts.append(a)
            k += 1
        pts.append(mpmath.mpf(x_max))
        return mpmath.quad(f, pts)


class TestChi:
    def test_zero(self, lp_default):
        assert lp.chi(0, lp_default) == 0

    def test_one_is_one(self, lp_default):
        assert abs(lp.chi(1, lp_default) - 1) < Fraction(1, 1 << 90)

    def test_e_minus_one(self, lp_default):
        # (e-1) ** (1/2 + cos(1)/4): exponent ~ 0.6350755, value ~ 1.4102714
        x = Fraction(171828182845904523536, 10 ** 20)
        got = lp.chi(x, lp_default)
        assert abs(float(got) - 1.4102714366) < 1e-9

    def test_anchor_exponent_flips(self, lp_default):
        # cos(ln(x+1)) = -1 at the first anchor: exponent exactly 1/4
        x = lp.anchor(1)
        got = lp.chi(x, lp_default)
        with mpmath.workprec(200):
            want = (mpmath.exp(mpmath.pi) - 1) ** mpmath.mpf(0.25)
            assert abs(got - lp._snap(want, 96)) < Fraction(1, 1 << 80)

    def test_double_precision_agreement(self, lp_default):
        x = Fraction(12345, 7)
        lo = lp.chi(x, lp_default, 96)
        hi = lp.chi(x, lp_default, 192)
        assert abs(lo - hi) < Fraction(1, 1 << 94)

    def test_envelope(self, lp_default):
        # x**(1/2-delta) <= chi <= x**(1/2+delta) for x >= 1
        for k in range(20):
            x = Fraction(3, 2) ** k
            c = lp.chi(x, lp_default)
            lo = x ** Fraction(1, 4)
            hi = x ** Fraction(3, 4)
            tol = Fraction(1, 1 << 60)
            assert lo ** 4 <= (c + tol) ** 4 and (c - tol) ** 4 <= hi ** 4

    def test_rejects_negative(self, lp_default):
        with pytest.raises(ValueError):
            lp.chi(-1, lp_default)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            lp.LogPeriodicParams(delta=Fraction(3, 4))
        with pytest.raises(ValueError):
            lp.LogPeriodicParams(alpha=0)
        with pytest.raises(ValueError):
            lp.LogPeriodicParams(quad_tol=Fraction(1, 10))


class TestNormalizers:
    def test_pinned_constants(self, lp_default):
        n = lp.normalizers(lp_default)
        assert abs(n.a - PINNED_A) < Fraction(1, 10 ** 9)
        assert abs(n.b - PINNED_B) < Fraction(1, 10 ** 9)

    def test_errors_reported(self, lp_default):
        n = lp.normalizers(lp_default)
        assert 0 < n.a_err < Fraction(1, 10 ** 8)
        assert 0 < n.b_err < Fraction(1, 10 ** 6)

    def test_against_mpmath_quad(self, lp_default):
        n = lp.normalizers(lp_default)
        oracle = _quad_oracle_inv_a(lp_default, float(n.x_max))
        inv_a = 1 / Fraction(n.a)
        assert abs(float(inv_a) - float(oracle)) < 1e-7 * float(oracle)

    def test_density_integrates_to_one(self, lp_default):
        n = lp.normalizers(lp_default)
        oracle = _quad_oracle_inv_a(lp_default, float(n.x_max))
        total = float(n.a) * float(oracle)
        assert abs(total - 1) < 1e-7

    def test_cached(self, lp_default):
        assert lp.normalizers(lp_default) is lp.normalizers(lp_default)

    def test_explicit_x_max(self):
        p = lp.LogPeriodicParams(x_max=Fraction(10 ** 6))
        n = lp.normalizers(p)
        assert n.x_max == 10 ** 6

    def test_unreachable_cutoff_raises(self):
        p = lp.LogPeriodicParams(x_max=Fraction(4))
        with pytest.raises(PrecisionFailure):
            lp.normalizers(p)


class TestTails:
    def test_tail_at_zero_is_one(self, lp_default):
        assert lp.f0_tail_log(0, lp_default).log2mag == 0

    def test_integrated_tail_at_zero_is_one(self, lp_default):
        assert abs(lp.f0I_tail_log(0, lp_default).log2mag) < Fraction(1, 10 ** 6)

    def test_tail_monotone_on_grid(self, lp_default):
        xs = [Fraction(k) for k in range(0, 200, 5)]
        logs = [lp.f0_tail_log(x, lp_default).log2mag for x in xs]
        assert all(a >= b for a, b in zip(logs, logs[1:]))

    def test_integrated_tail_nonincreasing(self, lp_default):
        xs = [Fraction(10) ** k for k in range(0, 5)]
        logs = [lp.f0I_tail_log(x, lp_default).log2mag for x in xs]
        assert all(a > b for a, b in zip(logs, logs[1:]))

    def test_tail_value(self, lp_default):
        # log2 e^{-10 - chi(10)}: chi(10) ~ 10**0.33557 ~ 2.1655
        got = lp.f0_tail_log(10, lp_default).log2mag
        with mpmath.workprec(120):
            chi10 = float(lp.chi(10, lp_default))
            want = -(10 + chi10) / float(mpmath.ln2)
        assert abs(float(got) - want) < 1e-9


class TestKaramata:
    def test_improves_with_x(self, lp_default):
        r2 = lp.karamata_ratio(100, lp_default)
        r4 = lp.karamata_ratio(10 ** 4, lp_default)
        assert abs(r4 - 1) < abs(r2 - 1)
        assert abs(r4 - 1) < Fraction(1, 10)

    def test_pinned_values(self, lp_default):
        assert abs(float(lp.karamata_ratio(100, lp_default)) - 0.873186) < 1e-4
        assert abs(float(lp.karamata_ratio(10 ** 4, lp_default)) - 1.000246) < 1e-4


class TestMiddleIntegral:
    def test_domain_check(self, lp_default):
        with pytest.raises(ValueError):
            lp.middle_mass_ratio(Fraction(2), lp_default, Fraction(9, 10))

    def test_h_exp_validation(self, lp_default):
        with pytest.raises(ValueError):
            lp.middle_mass_ratio(Fraction(100), lp_default, Fraction(2))

    def test_even_anchor_blows_up(self, lp_default):
        # at an even anchor chi(x) ~ x**(3/4) dwarfs the interior exponents
        ratio = lp.middle_mass_ratio(lp.anchor(4), lp_default, Fraction(3, 10))
        assert ratio.sign == 1
        assert ratio.log2mag > 1000

    def test_notched_cross_check_equals_split(self, nd10):
        # the same probe on the piecewise construction is exactly I2/f(x)
        x = notched.knot_position("c", 10)
        f = nd10.dense
        got = probes.notched_middle_integral(f, 10, x)
        _, i2 = conv.split_integrals(f, 10, x)
        assert got == i2 / f.eval(x)
