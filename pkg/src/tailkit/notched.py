"""The notched piecewise-linear density and its knot family.

The construction places knots at ``a_n = 2**(n*n)`` and
``b_n = a_n + a_{m(n)} * L_n**2`` with ``L_n`` the snapped constant for
``ln(n+1)`` and ``m(n)`` the smallest integer at least ``sqrt(5/6)*n``.
Between knots the function is linear, anchored by

    f0(0) = 1,   f0(a_n) = f0(c_n) = 2 * a_n**-3,   f0(b_n) = f0(a_n) / L_n,

where ``c_n = (a_{n+1} + b_n) / 2``.  The value at ``c_n`` therefore sits a
factor ``L_n`` above the value at ``b_n``: an ever-deeper notch that grows
without bound, which is exactly the non-almost-decreasing behaviour the
probes measure.  Everything in sight is an exact rational once ``L_n`` is
snapped, so knot identities are checked at zero tolerance.

Indices are materialized densely only up to a configurable limit (default
64: ``a_65`` is a ~4300-bit integer, still exact but useless beyond tests).
Past the limit, the symbolic accessors (`knot_logf`) serve log-scale views
at arbitrary ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from tailkit.numerics import DEFAULT_PRECISION, LogValue, log2_snap, log_nat, root_snap
from tailkit.piecewise import Knot, PiecewisePoly, from_linear_knots

KNOT_KINDS = ("a", "b", "c", "d", "s")
DENSE_LIMIT = 64


def m_of(n: int) -> int:
    """Smallest positive integer k with 6*k*k >= 5*n*n.

    Exact-integer form of "smallest k >= sqrt(5/6)*n"; the tie 6k^2 = 5n^2
    is impossible, so the inequality form is unambiguous.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    five_nn = 5 * n * n
    k = math.isqrt(five_nn // 6)
    while 6 * k * k < five_nn:
        k += 1
    return max(k, 1)


def a_position(n: int) -> Fraction:
    """a_n = 2**(n*n); a_0 is taken as 0 (anchor of the first segment)."""
    if n == 0:
        return Fraction(0)
    return Fraction(1 << (n * n))


def _check_dense(n: int, dense_limit: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if n > dense_limit:
        raise ValueError(
            f"n={n} exceeds the dense limit {dense_limit}; "
            "use knot_logf for symbolic log-scale access")


def knot_position(kind: str, n: int,
                  precision_bits: int = DEFAULT_PRECISION,
                  dense_limit: int = DENSE_LIMIT) -> Fraction:
    """Exact abscissa of a knot, for n within the dense limit."""
    _check_dense(n, dense_limit)
    if kind == "a":
        return a_position(n)
    if kind == "b":
        lam = log_nat(n, precision_bits)
        return a_position(n) + a_position(m_of(n)) * lam * lam
    if kind == "c":
        return (a_position(n + 1) + knot_position("b", n, precision_bits,
                                                  dense_limit)) / 2
    if kind in ("d", "s"):
        d_knot, s_knot = threshold_knots(n, precision_bits, dense_limit)
        return d_knot.x if kind == "d" else s_knot.x
    raise ValueError(f"unknown knot kind {kind!r} (expected one of {KNOT_KINDS})")


def knot_value(kind: str, n: int,
               precision_bits: int = DEFAULT_PRECISION,
               dense_limit: int = DENSE_LIMIT) -> Fraction:
    """Exact unnormalized value f0 at a knot, for n within the dense limit."""
    _check_dense(n, dense_limit)
    if kind in ("a", "c"):
        return Fraction(2, 1 << (3 * n * n))
    if kind == "b":
        return Fraction(2, 1 << (3 * n * n)) / log_nat(n, precision_bits)
    if kind in ("d", "s"):
        d_knot, s_knot = threshold_knots(n, precision_bits, dense_limit)
        return d_knot.f if kind == "d" else s_knot.f
    raise ValueError(f"unknown knot kind {kind!r} (expected one of {KNOT_KINDS})")


def knot_logf(kind: str, n: int,
              precision_bits: int = DEFAULT_PRECISION) -> LogValue:
    """log2 of f0 at a knot, valid at any n (no dense materialization).

    a/c knots give exactly 1 - 3*n*n; b knots subtract log2(L_n); d/s knots
    subtract half of it (their value is f0(b_n) * sqrt(L_n)).
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    base = Fraction(1 - 3 * n * n)
    if kind in ("a", "c"):
        return LogValue(1, base)
    log2_lam = log2_snap(log_nat(n, precision_bits), precision_bits)
    if kind == "b":
        return LogValue(1, base - log2_lam)
    if kind in ("d", "s"):
        if n < 2:
            raise ValueError("threshold knots are undefined for n=1")
        return LogValue(1, base - log2_lam / 2)
    raise ValueError(f"unknown knot kind {kind!r} (expected one of {KNOT_KINDS})")


def threshold_knots(n: int,
                    precision_bits: int = DEFAULT_PRECISION,
                    dense_limit: int = DENSE_LIMIT) -> tuple[Knot, Knot]:
    """The crossings d_n in (b_n, c_n] and s_n in (c_n, a_{n+1}] where f0
    equals f0(b_n) * sqrt(L_n) (square root snapped, crossing exact).

    Undefined for n=1: L_1 < 1 puts the target on the wrong side of f0(b_1).
    """
    if not isinstance(n, int) or n < 2:
        raise ValueError(
            f"threshold knots need n >= 2 (L_1 = ln 2 < 1 flips the target), got {n!r}")
    _check_dense(n, dense_limit)
    lam = log_nat(n, precision_bits)
    sqrt_lam = root_snap(lam, 2, precision_bits)
    f_a = knot_value("a", n, precision_bits, dense_limit)
    f_b = knot_value("b", n, precision_bits, dense_limit)
    f_next = knot_value("a", n + 1, precision_bits, dense_limit)
    target = f_b * sqrt_lam
    if not f_b < target < f_a:
        raise ValueError(f"threshold target out of range at n={n}")
    b = knot_position("b", n, precision_bits, dense_limit)
    c = knot_position("c", n, precision_bits, dense_limit)
    a_next = a_position(n + 1)
    d_x = b + (target - f_b) * (c - b) / (f_a - f_b)
    s_x = c + (f_a - target) * (a_next - c) / (f_a - f_next)
    return Knot(d_x, target), Knot(s_x, target)


@dataclass(frozen=True)
class NotchedDensity:
    """Dense truncation of the construction over [0, a_{N+1}].

    ``dense`` is the unnormalized f0 (3N+1 linear segments); ``mass`` its
    exact integral.  The normalized view is available on demand; both
    conventions stay reproducible.
    """

    truncation_n: int
    dense: PiecewisePoly
    mass: Fraction
    precision_bits: int

    def density(self) -> PiecewisePoly:
        scaled, _ = self.dense.normalize()
        return scaled

    def omitted_tail_bound(self) -> Fraction:
        """Upper bound on the unnormalized mass dropped by truncation.

        The first omitted block integrates to at most f0(a_{N+1}) * a_{N+2},
        and later blocks shrink by more than a factor 2 each, so twice that
        bounds the whole tail.
        """
        n = self.truncation_n + 1
        return 2 * knot_value("a", n, self.precision_bits, n) * a_position(n + 1)


def build_density(truncation_n: int,
                  precision_bits: int = DEFAULT_PRECISION,
                  dense_limit: int = DENSE_LIMIT) -> NotchedDensity:
    """Materialize the construction for n = 1..N over [0, a_{N+1}]."""
    n_top = truncation_n
    if not isinstance(n_top, int) or n_top < 1:
        raise ValueError(f"truncation index must be a positive integer, got {n_top!r}")
    if n_top + 1 > dense_limit:
        raise ValueError(
            f"truncation index {n_top} needs knots beyond the dense limit {dense_limit}")
    knots = [(Fraction(0), Fraction(1)),
             (a_position(1), knot_value("a", 1, precision_bits, dense_limit))]
    for n in range(1, n_top + 1):
        knots.append((knot_position("b", n, precision_bits, dense_limit),
                      knot_value("b", n, precision_bits, dense_limit)))
        knots.append((knot_position("c", n, precision_bits, dense_limit),
                      knot_value("c", n, precision_bits, dense_limit)))
        knots.append((a_position(n + 1),
                      knot_value("a", n + 1, precision_bits, dense_limit)))
    dense = from_linear_knots(knots)
    return NotchedDensity(truncation_n=n_top, dense=dense,
                          mass=dense.total_mass(), precision_bits=precision_bits)


def slope_value_separation(nd: NotchedDensity, n: int) -> Fraction:
    """max over the three segments of block n of |slope| / inf f0.

    Finite-n restatement of the slope-versus-value separation: this ratio
    is finite at every n and decreasing from n=5 on.
    """
    if not 1 <= n <= nd.truncation_n:
        raise ValueError(f"block {n} is not materialized (N={nd.truncation_n})")
    pb, dl = nd.precision_bits, max(DENSE_LIMIT, nd.truncation_n + 1)
    pts = [knot_position("a", n, pb, dl), knot_position("b", n, pb, dl),
           knot_position("c", n, pb, dl), a_position(n + 1)]
    vals = [knot_value("a", n, pb, dl), knot_value("b", n, pb, dl),
            knot_value("c", n, pb, dl), knot_value("a", n + 1, pb, dl)]
    worst = Fraction(0)
    for (x0, x1, f0, f1) in zip(pts, pts[1:], vals, vals[1:]):
        slope = abs((f1 - f0) / (x1 - x0))
        worst = max(worst, slope / min(f0, f1))
    return worst
