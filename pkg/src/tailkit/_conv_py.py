"""Pure-Python convolution kernel over exact rationals.

Twin of the compiled kernel ``_conv_cy``; both expose the same two entry
points and must produce bit-identical results.  Rationals travel through
the hot loops as plain ``(num, den)`` int pairs (den > 0, gcd-reduced) to
avoid per-operation Fraction overhead; Fractions appear only at the API
boundary.

``conv_dense(P, Q)`` builds the full piecewise-cubic convolution of two
piecewise-linear functions: output breakpoints are all pairwise sums of
input breakpoints, and every (segment, segment) pair contributes up to
three cubic-in-x pieces that are accumulated with a difference-array sweep
over the output cells, so the total work is O(pairs + cells).

``conv_point(P, Q, x, y_lo, y_hi)`` evaluates the windowed convolution
integral at one abscissa without building the dense object: the y-range is
cut at every Q breakpoint and every reflected P breakpoint, and each cell
integrates a product of two linears in closed form.
"""

from fractions import Fraction
from math import gcd

BACKEND = "python"

_ZERO = (0, 1)


def _norm(n, d):
    if n == 0:
        return _ZERO
    g = gcd(n, d)
    if g > 1:
        return n // g, d // g
    return n, d


def _add(a, b):
    an, ad = a
    bn, bd = b
    if ad == bd:
        return _norm(an + bn, ad)
    return _norm(an * bd + bn * ad, ad * bd)


def _sub(a, b):
    an, ad = a
    bn, bd = b
    if ad == bd:
        return _norm(an - bn, ad)
    return _norm(an * bd - bn * ad, ad * bd)


def _mul(a, b):
    an, ad = a
    bn, bd = b
    if an == 0 or bn == 0:
        return _ZERO
    g1 = gcd(an, bd)
    g2 = gcd(bn, ad)
    return (an // g1) * (bn // g2), (ad // g2) * (bd // g1)


def _cmp(a, b):
    v = a[0] * b[1] - b[0] * a[1]
    return (v > 0) - (v < 0)


def _pairs(values):
    out = []
    for v in values:
        f = Fraction(v)
        out.append((f.numerator, f.denominator))
    return out


def _cell_value(alpha, p1, beta, q1, u, v):
    """Integral over y in [u, v] of (alpha - p1*y) * (beta + q1*y)."""
    u2 = _mul(u, u)
    v2 = _mul(v, v)
    d1 = _sub(v, u)
    d2 = _sub(v2, u2)
    d3 = _sub(_mul(v2, v), _mul(u2, u))
    total = _mul(_mul(alpha, beta), d1)
    lin = _sub(_mul(alpha, q1), _mul(p1, beta))
    total = _add(total, _mul(lin, (d2[0], d2[1] * 2)))
    pq = _mul(p1, q1)
    return _sub(total, _mul(pq, (d3[0], d3[1] * 3)))


def _owner(breaks, x):
    """Index of the segment (breaks[i], breaks[i+1]] owning x (x strictly
    inside the support and never equal to an interior cut by construction)."""
    lo, hi = 0, len(breaks) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _cmp(breaks[mid], x) < 0:
            lo = mid
        else:
            hi = mid
    return lo


def conv_point(p_breaks, p_c0, p_c1, q_breaks, q_c0, q_c1, x, y_lo, y_hi):
    """Exact value of the windowed convolution integral at x.

    Integrates P(x-y) * Q(y) over y in [y_lo, y_hi] clipped to the region
    where both factors are inside their supports.
    """
    sb = _pairs(p_breaks)
    tb = _pairs(q_breaks)
    pc0 = _pairs(p_c0)
    pc1 = _pairs(p_c1)
    qc0 = _pairs(q_c0)
    qc1 = _pairs(q_c1)
    xf = Fraction(x)
    xp = (xf.numerator, xf.denominator)
    lo = _pairs([y_lo])[0]
    hi = _pairs([y_hi])[0]

    key = lambda p: Fraction(p[0], p[1])
    wlo = max(lo, tb[0], _sub(xp, sb[-1]), key=key)
    whi = min(hi, tb[-1], _sub(xp, sb[0]), key=key)
    if _cmp(whi, wlo) <= 0:
        return Fraction(0)

    cuts = {wlo, whi}
    for t in tb:
        if _cmp(wlo, t) < 0 and _cmp(t, whi) < 0:
            cuts.add(t)
    for s in sb:
        y = _sub(xp, s)
        if _cmp(wlo, y) < 0 and _cmp(y, whi) < 0:
            cuts.add(y)
    grid = sorted(cuts, key=lambda p: Fraction(p[0], p[1]))

    total = _ZERO
    for u, v in zip(grid, grid[1:]):
        half_sum = _add(u, v)
        mid = _norm(half_sum[0], half_sum[1] * 2)
        j = _owner(tb, mid)
        i = _owner(sb, _sub(xp, mid))
        alpha = _add(pc0[i], _mul(pc1[i], _sub(xp, sb[i])))
        beta = _sub(qc0[j], _mul(qc1[j], tb[j]))
        total = _add(total, _cell_value(alpha, pc1[i], beta, qc1[j], u, v))
    return Fraction(total[0], total[1])


# ------------------------- dense convolution -------------------------

def _poly_add(a, b):
    return [_add(x, y) for x, y in zip(a, b)]


def _poly_sub(a, b):
    return [_sub(x, y) for x, y in zip(a, b)]


def _poly_mul(a, b):
    out = [_ZERO, _ZERO, _ZERO, _ZERO]
    for i, ai in enumerate(a):
        if ai[0] == 0:
            continue
        for j, bj in enumerate(b):
            if bj[0] == 0 or i + j > 3:
                continue
            out[i + j] = _add(out[i + j], _mul(ai, bj))
    return out


def _poly_scale(a, s):
    return [_mul(x, s) for x in a]


def _piece_coeffs(alpha0, alpha1, p1, beta, q1, lpoly, upoly):
    """Global-x cubic for the integral with bounds L(x), U(x) (linear)."""
    alpha = [alpha0, alpha1, _ZERO, _ZERO]
    u2 = _poly_mul(upoly, upoly)
    l2 = _poly_mul(lpoly, lpoly)
    term = _poly_scale(_poly_mul(alpha, _poly_sub(upoly, lpoly)), beta)
    lin = [_sub(_mul(alpha0, q1), _mul(p1, beta)),
           _mul(alpha1, q1), _ZERO, _ZERO]
    half = _poly_scale(_poly_mul(lin, _poly_sub(u2, l2)), (1, 2))
    term = _poly_add(term, half)
    d3 = _poly_sub(_poly_mul(u2, upoly), _poly_mul(l2, lpoly))
    pq = _mul(p1, q1)
    return _poly_sub(term, _poly_scale(d3, (pq[0], pq[1] * 3)))


def conv_dense(p_breaks, p_c0, p_c1, q_breaks, q_c0, q_c1):
    """Full piecewise-cubic convolution of two piecewise-linear functions.

    Returns (breakpoints, coefficient quadruples); coefficients are in the
    local variable of each output cell.
    """
    sb = _pairs(p_breaks)
    tb = _pairs(q_breaks)
    pc0 = _pairs(p_c0)
    pc1 = _pairs(p_c1)
    qc0 = _pairs(q_c0)
    qc1 = _pairs(q_c1)

    sums = {}
    for s in sb:
        for t in tb:
            sums[_add(s, t)] = 0
    grid = sorted(sums, key=lambda p: Fraction(p[0], p[1]))
    index = {p: k for k, p in enumerate(grid)}
    ncells = len(grid) - 1
    diff = [[_ZERO, _ZERO, _ZERO, _ZERO] for _ in range(ncells + 1)]

    for i in range(len(sb) - 1):
        s0, s1 = sb[i], sb[i + 1]
        p0, p1 = pc0[i], pc1[i]
        for j in range(len(tb) - 1):
            t0, t1 = tb[j], tb[j + 1]
            q0, q1 = qc0[j], qc1[j]
            alpha0 = _sub(p0, _mul(p1, s0))
            beta = _sub(q0, _mul(q1, t0))
            a = _add(s0, t0)
            b = _add(s0, t1)
            c = _add(s1, t0)
            d = _add(s1, t1)
            b_le_c = _cmp(b, c) <= 0
            e, f = (b, c) if b_le_c else (c, b)

            neg_s0 = (-s0[0], s0[1])
            neg_s1 = (-s1[0], s1[1])
            const_t0 = [t0, _ZERO, _ZERO, _ZERO]
            const_t1 = [t1, _ZERO, _ZERO, _ZERO]
            lin_s0 = [neg_s0, (1, 1), _ZERO, _ZERO]
            lin_s1 = [neg_s1, (1, 1), _ZERO, _ZERO]

            pieces = [(a, e, const_t0, lin_s0)]
            if _cmp(e, f) < 0:
                if b_le_c:
                    pieces.append((e, f, const_t0, const_t1))
                else:
                    pieces.append((e, f, lin_s1, lin_s0))
            pieces.append((f, d, lin_s1, const_t1))

            for xlo, xhi, lpoly, upoly in pieces:
                coeffs = _piece_coeffs(alpha0, p1, p1, beta, q1, lpoly, upoly)
                k0 = index[xlo]
                k1 = index[xhi]
                diff[k0] = _poly_add(diff[k0], coeffs)
                diff[k1] = _poly_sub(diff[k1], coeffs)

    out_breaks = [Fraction(p[0], p[1]) for p in grid]
    out_coeffs = []
    run = [_ZERO, _ZERO, _ZERO, _ZERO]
    for k in range(ncells):
        run = _poly_add(run, diff[k])
        a = grid[k]
        c0, c1, c2, c3 = run
        a2 = _mul(a, a)
        a3 = _mul(a2, a)
        d0 = _add(_add(c0, _mul(c1, a)), _add(_mul(c2, a2), _mul(c3, a3)))
        d1 = _add(c1, _add(_mul((2 * c2[0], c2[1]), a), _mul((3 * c3[0], c3[1]), a2)))
        d2 = _add(c2, _mul((3 * c3[0], c3[1]), a))
        out_coeffs.append((Fraction(*d0), Fraction(*d1), Fraction(*d2), Fraction(*c3)))
    return out_breaks, out_coeffs
