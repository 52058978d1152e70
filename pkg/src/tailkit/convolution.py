"""Convolution engines over the selected kernel.

Three exact routes and one mixture route:

* ``conv_linear_exact``: full piecewise-cubic convolution of two
  piecewise-linear functions (the kernel's dense sweep).
* ``self_conv_value`` / ``conv_window_value``: single-abscissa values,
  optionally over a restricted y-window, without building the dense object.
* ``split_integrals``: the two-piece split of the self-convolution at
  ``a_{m(n)}``, whose parts reassemble the full integral exactly.
* ``mixture_local_conv``: the window mass of the two-sided mixture's
  self-convolution for positive abscissas, where the negative*negative
  term vanishes.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from tailkit import kernel
from tailkit.mixture import MixtureSpec
from tailkit.notched import NotchedDensity, a_position, m_of
from tailkit.piecewise import PiecewisePoly


def _linear_table(p: PiecewisePoly):
    c0s, c1s = [], []
    for seg in p.coeffs:
        if seg[2] != 0 or seg[3] != 0:
            raise ValueError("convolution inputs must be piecewise linear")
        c0s.append(seg[0])
        c1s.append(seg[1])
    return list(p.breakpoints), c0s, c1s


def conv_linear_exact(p: PiecewisePoly, q: PiecewisePoly) -> PiecewisePoly:
    """Exact piecewise-cubic representation of the convolution p*q.

    Output breakpoints are all pairwise sums of input breakpoints,
    deduplicated with exact equality.
    """
    pb, pc0, pc1 = _linear_table(p)
    qb, qc0, qc1 = _linear_table(q)
    breaks, coeffs = kernel.conv_dense(pb, pc0, pc1, qb, qc0, qc1)
    return PiecewisePoly(tuple(breaks), tuple(coeffs), continuous=True,
                         density=p.density and q.density)


def conv_window_value(p: PiecewisePoly, q: PiecewisePoly, x,
                      y_lo, y_hi) -> Fraction:
    """Integral of p(x-y) q(y) over [y_lo, y_hi], clipped to both supports."""
    pb, pc0, pc1 = _linear_table(p)
    qb, qc0, qc1 = _linear_table(q)
    return kernel.conv_point(pb, pc0, pc1, qb, qc0, qc1,
                             Fraction(x), Fraction(y_lo), Fraction(y_hi))


def self_conv_value(p: PiecewisePoly, x) -> Fraction:
    """(p*p)(x) at a single abscissa."""
    x = Fraction(x)
    lo, hi = p.support
    if not 2 * lo <= x <= 2 * hi:
        raise ValueError(f"{x} is outside the self-convolution support "
                         f"[{2 * lo}, {2 * hi}]")
    return conv_window_value(p, p, x, lo, hi)


def split_integrals(f: PiecewisePoly, n: int, x) -> tuple[Fraction, Fraction]:
    """(I1, I2) with I1 over y in [0, a_m], I2 over [a_m, x - a_m], m = m(n).

    Requires x in (a_n, a_{n+1}] and x - a_m >= a_m, so the three-piece
    partition [0,a_m] + [a_m, x-a_m] + [x-a_m, x] is valid and
    2*I1 + I2 reassembles the full self-convolution at x exactly.
    """
    x = Fraction(x)
    if not a_position(n) < x <= a_position(n + 1):
        raise ValueError(f"x={x} is not inside block {n}")
    cut = a_position(m_of(n))
    if x - cut < cut:
        raise ValueError(f"x={x} violates x - a_m >= a_m for block {n}")
    i1 = conv_window_value(f, f, x, Fraction(0), cut)
    i2 = conv_window_value(f, f, x, cut, x - cut)
    return i1, i2


@lru_cache(maxsize=4)
def _normalized_self_conv(nd: NotchedDensity) -> tuple[PiecewisePoly, PiecewisePoly]:
    # Convolve the unnormalized coefficients (short denominators) and scale
    # by mass**-2 once at the end; scaling inside the sweep would drag the
    # huge mass denominator through every cell gcd.
    f = nd.density()
    raw = conv_linear_exact(nd.dense, nd.dense)
    return f, raw.scale(1 / nd.mass ** 2)


def mixture_local_conv(mix: MixtureSpec, x, d) -> Fraction:
    """Window mass of the mixture's self-convolution over (x, x+d], x > 0.

    q1^2 * (f1*f1 mass) + 2 q1 q2 * sum of atom-shifted f1 masses.  Atoms
    whose position is beyond the dense support contribute nothing here (the
    shift pushes them past the truncation), as does the vanishing
    negative*negative term.
    """
    x, d = Fraction(x), Fraction(d)
    if x <= 0:
        raise ValueError("x must be positive: for x <= 0 the omitted "
                         "negative*negative term would contribute")
    if d <= 0:
        raise ValueError(f"window width must be positive, got {d}")
    f, conv = _normalized_self_conv(mix.f1)
    total = mix.q1 ** 2 * conv.interval_mass(x, d)
    cross = Fraction(0)
    for v, p in mix.f2.atoms:
        if v is not None:
            cross += p * f.interval_mass(x + v, d)
    v_res, p_res = mix.f2.residual
    if p_res:
        cross += p_res * f.interval_mass(x + v_res, d)
    return total + 2 * mix.q1 * mix.q2 * cross


def mixture_cross_mass(mix: MixtureSpec, x, d) -> Fraction:
    """F1*F2 window mass alone (the blow-up numerator), without weights."""
    x, d = Fraction(x), Fraction(d)
    if d <= 0:
        raise ValueError(f"window width must be positive, got {d}")
    f = mix.f1.density()
    cross = Fraction(0)
    for v, p in mix.f2.atoms:
        if v is not None:
            cross += p * f.interval_mass(x + v, d)
    v_res, p_res = mix.f2.residual
    if p_res:
        cross += p_res * f.interval_mass(x + v_res, d)
    return cross
