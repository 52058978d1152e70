"""Convolution kernel properties, run against every importable backend.

The dense sweep and the single-point evaluator are two independent exact
routes to the same integral, so they must agree to the last bit; so must
the pure-Python and compiled kernels.
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailkit import kernel
from tailkit import convolution as conv
from tailkit.piecewise import PiecewisePoly, from_linear_knots

BACKENDS = kernel.backends()
UNIFORM = from_linear_knots([(0, 1), (1, 1)])
TRIANGLE = from_linear_knots([(0, 0), (1, 1), (2, 0)])


def random_density(draw):
    n = draw(st.integers(min_value=2, max_value=6))
    xs = draw(st.lists(
        st.fractions(min_value=0, max_value=20, max_denominator=8),
        min_size=n, max_size=n, unique=True))
    fs = [draw(st.fractions(min_value=0, max_value=4, max_denominator=8))
          for _ in range(n)]
    if all(f == 0 for f in fs):
        fs[0] = Fraction(1)
    return from_linear_knots(list(zip(sorted(xs), fs)))


densities = st.composite(random_density)()
points = st.fractions(min_value=0, max_value=40, max_denominator=32)


def test_compiled_backend_present():
    # the build step should have produced the extension in this checkout
    assert "python" in BACKENDS
    if len(BACKENDS) == 1:
        pytest.skip("compiled kernel not built; pure fallback only")
    assert BACKENDS["cython"].BACKEND == "cython"


def test_env_var_forces_pure_backend():
    import os
    import subprocess
    import sys
    out = subprocess.run(
        [sys.executable, "-c", "from tailkit import kernel; print(kernel.BACKEND)"],
        capture_output=True, text=True,
        env={**os.environ, "TAILKIT_PURE": "1"})
    assert out.stdout.strip() == "python"


class TestTextbookCases:
    def test_uniform_self_conv_is_triangle(self):
        got = conv.conv_linear_exact(UNIFORM, UNIFORM)
        assert list(got.breakpoints) == [0, 1, 2]
        for x in (Fraction(1, 2), 1, Fraction(3, 2), 2):
            assert got.eval(x) == TRIANGLE.eval(x)

    def test_symmetry_points(self):
        got = conv.conv_linear_exact(UNIFORM, UNIFORM)
        assert got.eval(Fraction(1, 2)) == Fraction(1, 2)
        assert got.eval(Fraction(3, 2)) == Fraction(1, 2)

    def test_self_conv_value_matches(self):
        assert conv.self_conv_value(UNIFORM, 1) == 1

    def test_rejects_nonlinear_input(self):
        cubic = PiecewisePoly((Fraction(0), Fraction(1)),
                              ((Fraction(0), Fraction(0), Fraction(0), Fraction(1)),))
        with pytest.raises(ValueError):
            conv.conv_linear_exact(cubic, cubic)

    def test_out_of_domain_point(self):
        with pytest.raises(ValueError):
            conv.self_conv_value(UNIFORM, 3)


class TestProperties:
    @given(densities, densities)
    @settings(max_examples=40, deadline=None)
    def test_mass_conservation(self, p, q):
        got = conv.conv_linear_exact(p, q)
        assert got.total_mass() == p.total_mass() * q.total_mass()

    @given(densities, densities, points)
    @settings(max_examples=60, deadline=None)
    def test_commutativity(self, p, q, x):
        pq = conv.conv_linear_exact(p, q)
        qp = conv.conv_linear_exact(q, p)
        lo, hi = pq.support
        x = min(max(x, lo), hi)
        assert pq.eval(x) == qp.eval(x)

    @given(densities, points)
    @settings(max_examples=60, deadline=None)
    def test_nonnegative_at_breakpoints_and_midpoints(self, p, x):
        got = conv.conv_linear_exact(p, p)
        for b in got.breakpoints:
            assert got.eval(b) >= 0
        lo, hi = got.support
        x = min(max(x, lo), hi)
        assert got.eval(x) >= 0

    @given(densities, points)
    @settings(max_examples=60, deadline=None)
    def test_point_matches_dense(self, p, x):
        dense = conv.conv_linear_exact(p, p)
        lo, hi = dense.support
        x = min(max(x, lo), hi)
        assert conv.self_conv_value(p, x) == dense.eval(x)

    @given(densities, points)
    @settings(max_examples=50, deadline=None)
    def test_continuity_at_internal_cells(self, p, x):
        dense = conv.conv_linear_exact(p, p)
        for i, b in enumerate(dense.breakpoints[1:-1], start=1):
            u = b - dense.breakpoints[i - 1]
            c0, c1, c2, c3 = dense.coeffs[i - 1]
            left_limit = ((c3 * u + c2) * u + c1) * u + c0
            assert left_limit == dense.coeffs[i][0]


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
class TestBackendAgreement:
    @given(densities, densities)
    @settings(max_examples=30, deadline=None)
    def test_dense_identical(self, p, q):
        args = (list(p.breakpoints), [c[0] for c in p.coeffs],
                [c[1] for c in p.coeffs],
                list(q.breakpoints), [c[0] for c in q.coeffs],
                [c[1] for c in q.coeffs])
        results = [impl.conv_dense(*args) for impl in BACKENDS.values()]
        assert all(r == results[0] for r in results)

    @given(densities, points, points, points)
    @settings(max_examples=60, deadline=None)
    def test_point_identical(self, p, x, y_lo, y_hi):
        args = (list(p.breakpoints), [c[0] for c in p.coeffs],
                [c[1] for c in p.coeffs],
                list(p.breakpoints), [c[0] for c in p.coeffs],
                [c[1] for c in p.coeffs])
        lo, hi = sorted((y_lo, y_hi))
        results = [impl.conv_point(*args, x, lo, hi)
                   for impl in BACKENDS.values()]
        assert all(r == results[0] for r in results)

    def test_notched_case_identical(self, nd3):
        f = nd3.density()
        args = (list(f.breakpoints), [c[0] for c in f.coeffs],
                [c[1] for c in f.coeffs]) * 2
        outs = {name: impl.conv_dense(*args)
                for name, impl in BACKENDS.items()}
        vals = list(outs.values())
        assert all(v == vals[0] for v in vals)
