# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""Compiled convolution kernel over exact rationals.

Twin of ``_conv_py`` (see there for the algorithm); the arithmetic payload
is arbitrary-precision Python ints either way, so this variant buys its
speed from C-level call dispatch and loop bookkeeping, not from machine
arithmetic.  Results are bit-identical to the pure kernel by construction;
the test suite enforces it and the benchmark quantifies the gap.
"""

from fractions import Fraction
from math import gcd

BACKEND = "cython"

cdef tuple _ZERO = (0, 1)


cdef inline tuple _norm(object n, object d):
    if n == 0:
        return _ZERO
    g = gcd(n, d)
    if g > 1:
        return (n // g, d // g)
    return (n, d)


cdef inline tuple _add(tuple a, tuple b):
    an, ad = a
    bn, bd = b
    if ad == bd:
        return _norm(an + bn, ad)
    return _norm(an * bd + bn * ad, ad * bd)


cdef inline tuple _sub(tuple a, tuple b):
    an, ad = a
    bn, bd = b
    if ad == bd:
        return _norm(an - bn, ad)
    return _norm(an * bd - bn * ad, ad * bd)


cdef inline tuple _mul(tuple a, tuple b):
    an, ad = a
    bn, bd = b
    if an == 0 or bn == 0:
        return _ZERO
    g1 = gcd(an, bd)
    g2 = gcd(bn, ad)
    return ((an // g1) * (bn // g2), (ad // g2) * (bd // g1))


cdef inline int _cmp(tuple a, tuple b):
    v = a[0] * b[1] - b[0] * a[1]
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


cdef list _pairs(object values):
    cdef list out = []
    for v in values:
        f = Fraction(v)
        out.append((f.numerator, f.denominator))
    return out


cdef tuple _cell_value(tuple alpha, tuple p1, tuple beta, tuple q1,
                       tuple u, tuple v):
    cdef tuple u2 = _mul(u, u)
    cdef tuple v2 = _mul(v, v)
    cdef tuple d1 = _sub(v, u)
    cdef tuple d2 = _sub(v2, u2)
    cdef tuple d3 = _sub(_mul(v2, v), _mul(u2, u))
    cdef tuple total = _mul(_mul(alpha, beta), d1)
    cdef tuple lin = _sub(_mul(alpha, q1), _mul(p1, beta))
    total = _add(total, _mul(lin, (d2[0], d2[1] * 2)))
    cdef tuple pq = _mul(p1, q1)
    return _sub(total, _mul(pq, (d3[0], d3[1] * 3)))


cdef Py_ssize_t _owner(list breaks, tuple x):
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = len(breaks) - 1
    cdef Py_ssize_t mid
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _cmp(<tuple>breaks[mid], x) < 0:
            lo = mid
        else:
            hi = mid
    return lo


def conv_point(p_breaks, p_c0, p_c1, q_breaks, q_c0, q_c1, x, y_lo, y_hi):
    """Exact value of the windowed convolution integral at x."""
    cdef list sb = _pairs(p_breaks)
    cdef list tb = _pairs(q_breaks)
    cdef list pc0 = _pairs(p_c0)
    cdef list pc1 = _pairs(p_c1)
    cdef list qc0 = _pairs(q_c0)
    cdef list qc1 = _pairs(q_c1)
    xf = Fraction(x)
    cdef tuple xp = (xf.numerator, xf.denominator)
    lof = Fraction(y_lo)
    hif = Fraction(y_hi)
    cdef tuple wlo = (lof.numerator, lof.denominator)
    cdef tuple whi = (hif.numerator, hif.denominator)

    cdef tuple cand
    cand = <tuple>tb[0]
    if _cmp(cand, wlo) > 0:
        wlo = cand
    cand = _sub(xp, <tuple>sb[len(sb) - 1])
    if _cmp(cand, wlo) > 0:
        wlo = cand
    cand = <tuple>tb[len(tb) - 1]
    if _cmp(cand, whi) < 0:
        whi = cand
    cand = _sub(xp, <tuple>sb[0])
    if _cmp(cand, whi) < 0:
        whi = cand
    if _cmp(whi, wlo) <= 0:
        return Fraction(0)

    cdef set cuts = {wlo, whi}
    cdef tuple t, y
    for t_obj in tb:
        t = <tuple>t_obj
        if _cmp(wlo, t) < 0 and _cmp(t, whi) < 0:
            cuts.add(t)
    for s_obj in sb:
        y = _sub(xp, <tuple>s_obj)
        if _cmp(wlo, y) < 0 and _cmp(y, whi) < 0:
            cuts.add(y)
    cdef list grid = sorted(cuts, key=lambda p: Fraction(p[0], p[1]))

    cdef tuple total = _ZERO
    cdef tuple u, v, half_sum, mid, alpha, beta
    cdef Py_ssize_t k, i, j
    for k in range(len(grid) - 1):
        u = <tuple>grid[k]
        v = <tuple>grid[k + 1]
        half_sum = _add(u, v)
        mid = _norm(half_sum[0], half_sum[1] * 2)
        j = _owner(tb, mid)
        i = _owner(sb, _sub(xp, mid))
        alpha = _add(<tuple>pc0[i], _mul(<tuple>pc1[i], _sub(xp, <tuple>sb[i])))
        beta = _sub(<tuple>qc0[j], _mul(<tuple>qc1[j], <tuple>tb[j]))
        total = _add(total, _cell_value(alpha, <tuple>pc1[i], beta,
                                        <tuple>qc1[j], u, v))
    return Fraction(total[0], total[1])


# ------------------------- dense convolution -------------------------

cdef list _poly_add(list a, list b):
    return [_add(<tuple>x, <tuple>y) for x, y in zip(a, b)]


cdef list _poly_sub(list a, list b):
    return [_sub(<tuple>x, <tuple>y) for x, y in zip(a, b)]


cdef list _poly_mul(list a, list b):
    cdef list out = [_ZERO, _ZERO, _ZERO, _ZERO]
    cdef Py_ssize_t i, j
    cdef tuple ai, bj
    for i in range(len(a)):
        ai = <tuple>a[i]
        if ai[0] == 0:
            continue
        for j in range(len(b)):
            if i + j > 3:
                continue
            bj = <tuple>b[j]
            if bj[0] == 0:
                continue
            out[i + j] = _add(<tuple>out[i + j], _mul(ai, bj))
    return out


cdef list _poly_scale(list a, tuple s):
    return [_mul(<tuple>x, s) for x in a]


cdef list _piece_coeffs(tuple alpha0, tuple alpha1, tuple p1, tuple beta,
                        tuple q1, list lpoly, list upoly):
    cdef list alpha = [alpha0, alpha1, _ZERO, _ZERO]
    cdef list u2 = _poly_mul(upoly, upoly)
    cdef list l2 = _poly_mul(lpoly, lpoly)
    cdef list term = _poly_scale(_poly_mul(alpha, _poly_sub(upoly, lpoly)), beta)
    cdef list lin = [_sub(_mul(alpha0, q1), _mul(p1, beta)),
                     _mul(alpha1, q1), _ZERO, _ZERO]
    cdef list half = _poly_scale(_poly_mul(lin, _poly_sub(u2, l2)), (1, 2))
    term = _poly_add(term, half)
    cdef list d3 = _poly_sub(_poly_mul(u2, upoly), _poly_mul(l2, lpoly))
    cdef tuple pq = _mul(p1, q1)
    return _poly_sub(term, _poly_scale(d3, (pq[0], pq[1] * 3)))


def conv_dense(p_breaks, p_c0, p_c1, q_breaks, q_c0, q_c1):
    """Full piecewise-cubic convolution of two piecewise-linear functions."""
    cdef list sb = _pairs(p_breaks)
    cdef list tb = _pairs(q_breaks)
    cdef list pc0 = _pairs(p_c0)
    cdef list pc1 = _pairs(p_c1)
    cdef list qc0 = _pairs(q_c0)
    cdef list qc1 = _pairs(q_c1)

    cdef dict sums = {}
    cdef tuple s, t
    for s_obj in sb:
        s = <tuple>s_obj
        for t_obj in tb:
            sums[_add(s, <tuple>t_obj)] = 0
    cdef list grid = sorted(sums, key=lambda p: Fraction(p[0], p[1]))
    cdef dict index = {}
    cdef Py_ssize_t k
    for k in range(len(grid)):
        index[grid[k]] = k
    cdef Py_ssize_t ncells = len(grid) - 1
    cdef list diff = [[_ZERO, _ZERO, _ZERO, _ZERO] for _ in range(ncells + 1)]

    cdef Py_ssize_t i, j, k0, k1
    cdef tuple s0, s1, t0, t1, p0, p1, q0, q1, alpha0, beta
    cdef tuple a, b, c, d, e, f
    cdef bint b_le_c
    cdef list const_t0, const_t1, lin_s0, lin_s1, coeffs, pieces
    for i in range(len(sb) - 1):
        s0 = <tuple>sb[i]
        s1 = <tuple>sb[i + 1]
        p0 = <tuple>pc0[i]
        p1 = <tuple>pc1[i]
        for j in range(len(tb) - 1):
            t0 = <tuple>tb[j]
            t1 = <tuple>tb[j + 1]
            q0 = <tuple>qc0[j]
            q1 = <tuple>qc1[j]
            alpha0 = _sub(p0, _mul(p1, s0))
            beta = _sub(q0, _mul(q1, t0))
            a = _add(s0, t0)
            b = _add(s0, t1)
            c = _add(s1, t0)
            d = _add(s1, t1)
            b_le_c = _cmp(b, c) <= 0
            if b_le_c:
                e = b
                f = c
            else:
                e = c
                f = b

            const_t0 = [t0, _ZERO, _ZERO, _ZERO]
            const_t1 = [t1, _ZERO, _ZERO, _ZERO]
            lin_s0 = [(-s0[0], s0[1]), (1, 1), _ZERO, _ZERO]
            lin_s1 = [(-s1[0], s1[1]), (1, 1), _ZERO, _ZERO]

            pieces = [(a, e, const_t0, lin_s0)]
            if _cmp(e, f) < 0:
                if b_le_c:
                    pieces.append((e, f, const_t0, const_t1))
                else:
                    pieces.append((e, f, lin_s1, lin_s0))
            pieces.append((f, d, lin_s1, const_t1))

            for piece in pieces:
                coeffs = _piece_coeffs(alpha0, p1, p1, beta, q1,
                                       <list>(<tuple>piece)[2],
                                       <list>(<tuple>piece)[3])
                k0 = <Py_ssize_t>index[(<tuple>piece)[0]]
                k1 = <Py_ssize_t>index[(<tuple>piece)[1]]
                diff[k0] = _poly_add(<list>diff[k0], coeffs)
                diff[k1] = _poly_sub(<list>diff[k1], coeffs)

    cdef list out_breaks = [Fraction(p[0], p[1]) for p in grid]
    cdef list out_coeffs = []
    cdef list run = [_ZERO, _ZERO, _ZERO, _ZERO]
    cdef tuple c0, c1, c2, c3, a2, a3, d0, d1, d2
    for k in range(ncells):
        run = _poly_add(run, <list>diff[k])
        a = <tuple>grid[k]
        c0 = <tuple>run[0]
        c1 = <tuple>run[1]
        c2 = <tuple>run[2]
        c3 = <tuple>run[3]
        a2 = _mul(a, a)
        a3 = _mul(a2, a)
        d0 = _add(_add(c0, _mul(c1, a)), _add(_mul(c2, a2), _mul(c3, a3)))
        d1 = _add(c1, _add(_mul((2 * c2[0], c2[1]), a),
                           _mul((3 * c3[0], c3[1]), a2)))
        d2 = _add(c2, _mul((3 * c3[0], c3[1]), a))
        out_coeffs.append((Fraction(d0[0], d0[1]), Fraction(d1[0], d1[1]),
                           Fraction(d2[0], d2[1]), Fraction(c3[0], c3[1])))
    return out_breaks, out_coeffs
