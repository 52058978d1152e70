"""Diagnostic probes: every ratio, scan and bound check the constructions
support, emitted as report rows.

Probes report evidence, never verdicts.  Scans over piecewise-linear
densities enumerate knots only (extrema of a piecewise-linear function sit
at knots); scans over the log-periodic density use a log-spaced grid
augmented with the anchor abscissas where the exponent modulation peaks.
Trend claims are encoded as two-point monotone-improvement checks, not
absolute tolerances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from tailkit import convolution as conv
from tailkit import logperiodic as lp
from tailkit import mixture as mx
from tailkit import notched
from tailkit.numerics import DEFAULT_PRECISION, LogValue, log_nat
from tailkit.piecewise import PiecewisePoly
from tailkit.render import decimal_str, value_str

Value = Union[Fraction, LogValue, int]

CSV_HEADER = "probe,x_or_n,value,aux_json,precision_flag"


def _csv_field(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


@dataclass
class ProbeRow:
    probe: str
    x_or_n: str
    value: Value
    aux: dict = field(default_factory=dict)
    precision_flag: bool = False

    def csv(self) -> str:
        aux = {k: (value_str(v) if isinstance(v, (Fraction, LogValue)) else v)
               for k, v in sorted(self.aux.items())}
        aux_json = json.dumps(aux, sort_keys=True, separators=(",", ":"))
        flag = "1" if self.precision_flag else "0"
        return ",".join([_csv_field(self.probe), _csv_field(self.x_or_n),
                         _csv_field(value_str(self.value)),
                         _csv_field(aux_json), flag])


def render_csv(rows: list[ProbeRow]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv() for r in rows]) + "\n"


# ------------------------------ ratios ------------------------------

def long_tail_ratio(p: PiecewisePoly, x, t) -> Fraction:
    """f(x+t) / f(x): drifts to 1 for long-tailed densities."""
    x, t = Fraction(x), Fraction(t)
    denom = p.eval(x)
    if denom == 0:
        raise ValueError(f"density vanishes at x={x}")
    return p.eval(x + t) / denom


def subexp_ratio(p: PiecewisePoly, x) -> Fraction:
    """(f*f)(x) / (2 f(x)): drifts to 1 for subexponential densities."""
    x = Fraction(x)
    denom = p.eval(x)
    if denom == 0:
        raise ValueError(f"density vanishes at x={x}")
    return conv.self_conv_value(p, x) / (2 * denom)


def local_tail_ratio(p: PiecewisePoly, x, d) -> Fraction:
    """Window mass over (x, x+d] divided by d * f(x)."""
    x, d = Fraction(x), Fraction(d)
    denom = p.eval(x)
    if denom == 0:
        raise ValueError(f"density vanishes at x={x}")
    return p.interval_mass(x, d) / (d * denom)


# ------------------------------- scans -------------------------------

@dataclass(frozen=True)
class ScanResult:
    sup_ratio: Value
    witness_x: str
    witness_y: str


def almost_decrease_scan(p: PiecewisePoly, x0=0) -> ScanResult:
    """sup of f(y)/f(x) over knot pairs x0 <= x <= y, with the maximizing
    pair.  Exact for piecewise-linear p (extrema at knots)."""
    x0 = Fraction(x0)
    lo, hi = p.support
    start = max(x0, lo)
    if start > hi:
        raise ValueError(f"scan start {x0} is beyond the support end {hi}")
    points = [start] + [b for b in p.breakpoints if b > start]
    best = Fraction(0)
    best_pair = (start, start)
    min_val: Optional[Fraction] = None
    min_at = start
    for pt in points:
        v = p.eval(pt)
        if min_val is None or v < min_val:
            if v > 0:
                min_val, min_at = v, pt
            elif min_val is None:
                continue
        if min_val is not None and min_val > 0:
            ratio = v / min_val
            if ratio > best:
                best, best_pair = ratio, (min_at, pt)
    if min_val is None:
        raise ValueError("density vanishes on the whole scan range")
    return ScanResult(best, decimal_str(best_pair[0]), decimal_str(best_pair[1]))


def notched_knot_scan(n_max: int,
                      precision_bits: int = DEFAULT_PRECISION,
                      n_start: int = 1) -> ScanResult:
    """Symbolic knot scan of the notched construction out to block n_max.

    Works on log2 values, so n_max may exceed any dense limit.  The b->c
    rise inside each block realizes the ratio L_n, so the supremum over a
    horizon is L_{n_max}, attained at (b_{n_max}, c_{n_max}).
    """
    if n_max < n_start or n_start < 1:
        raise ValueError(f"empty scan range [{n_start}, {n_max}]")
    best: Optional[Fraction] = None
    best_pair = ("", "")
    min_log: Optional[Fraction] = None
    min_label = ""
    for n in range(n_start, n_max + 1):
        for kind in ("a", "b", "c"):
            lv = notched.knot_logf(kind, n, precision_bits)
            label = f"{kind}{n}"
            if min_log is None or lv.log2mag < min_log:
                min_log, min_label = lv.log2mag, label
            diff = lv.log2mag - min_log
            if best is None or diff > best:
                best, best_pair = diff, (min_label, label)
    return ScanResult(LogValue(1, best), best_pair[0], best_pair[1])


def logperiodic_scan(p: lp.LogPeriodicParams, k_max: int,
                     points_per_period: int = 8) -> tuple[ScanResult, list[ProbeRow]]:
    """Grid scan of the log-periodic density up to the k_max-th anchor.

    Returns the supremum ratio over ordered grid pairs plus one row per
    even/odd anchor pair recording both directed ratios (log2), since the
    growing direction at consecutive anchors is itself a finding: the later
    anchor holds the larger density, which witnesses the failure of almost
    decrease just as well as the reverse orientation would.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    import mpmath
    with mpmath.workprec(lp._WP):
        grid = []
        steps = k_max * points_per_period
        for j in range(steps + 1):
            x = lp._snap(mpmath.exp(mpmath.pi * j / points_per_period) - 1, 64)
            grid.append(x)
    logs = [(x, lp.density_log(x, p)) for x in grid]
    best: Optional[Fraction] = None
    best_pair = (Fraction(0), Fraction(0))
    min_log: Optional[Fraction] = None
    min_at = Fraction(0)
    for x, lv in logs:
        if min_log is None or lv.log2mag < min_log:
            min_log, min_at = lv.log2mag, x
        diff = lv.log2mag - min_log
        if best is None or diff > best:
            best, best_pair = diff, (min_at, x)
    rows = []
    for k in range(0, k_max, 2):
        if k + 1 > k_max:
            break
        even = lp.density_log(lp.anchor(k), p)
        odd = lp.density_log(lp.anchor(k + 1), p)
        rows.append(ProbeRow(
            probe="anchor_pair_ratio", x_or_n=f"k{k}",
            value=LogValue(1, odd.log2mag - even.log2mag),
            aux={"later_over_earlier_log2": decimal_str(odd.log2mag - even.log2mag),
                 "earlier_over_later_log2": decimal_str(even.log2mag - odd.log2mag),
                 "growing_direction": "later" if odd.log2mag > even.log2mag else "earlier"}))
    scan = ScanResult(LogValue(1, best), decimal_str(best_pair[0]),
                      decimal_str(best_pair[1]))
    return scan, rows


# --------------------------- series & bounds ---------------------------

def knot_ratio_series(n_max: int,
                      precision_bits: int = DEFAULT_PRECISION) -> list[tuple[int, Fraction]]:
    """The exact in-artifact ratios f(c_n)/f(b_n) = L_n for n = 2..n_max."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    return [(n, log_nat(n, precision_bits)) for n in range(2, n_max + 1)]


@dataclass(frozen=True)
class I2Check:
    x: Fraction
    i2: Fraction
    bound: Fraction
    bound_log2_closed_form: int
    passed: bool


def i2_bound_check(nd: notched.NotchedDensity, n: int) -> I2Check:
    """I2 at x = c_n against the sup-value-times-length bound.

    On the unnormalized construction the bound is exactly the power of two
    2**(-6*m*m + (n+1)**2 + 2) with m = m(n); the inequality is pure
    sup-times-length, hence valid at every finite n.
    """
    pb = nd.precision_bits
    dl = max(notched.DENSE_LIMIT, nd.truncation_n + 1)
    x = notched.knot_position("c", n, pb, dl)
    _, i2 = conv.split_integrals(nd.dense, n, x)
    m = notched.m_of(n)
    bound = notched.knot_value("a", m, pb, dl) ** 2 * notched.a_position(n + 1)
    exponent = -6 * m * m + (n + 1) ** 2 + 2
    assert bound == Fraction(2) ** exponent
    return I2Check(x=x, i2=i2, bound=bound,
                   bound_log2_closed_form=exponent, passed=i2 <= bound)


def notched_middle_integral(f: PiecewisePoly, n: int, x) -> Fraction:
    """Middle self-convolution mass over [a_m, x-a_m] divided by f(x)."""
    x = Fraction(x)
    cut = notched.a_position(notched.m_of(n))
    if x - cut < cut:
        raise ValueError(f"x={x} leaves no middle range for block {n}")
    denom = f.eval(x)
    if denom == 0:
        raise ValueError(f"density vanishes at x={x}")
    return conv.conv_window_value(f, f, x, cut, x - cut) / denom


def mixture_blowup_probe(mix: mx.MixtureSpec, schedule: mx.BlowupSchedule,
                         d) -> list[ProbeRow]:
    """One exact row (m=1) plus symbolic lower-bound rows (m >= 2).

    The exact row reports the cross-convolution window mass over
    d * f(b_{n_1}); the symbolic rows carry c * L(n_m)**(1/6), whose
    divergence is the desk-scale witness of the blow-up.
    """
    d = Fraction(d)
    if d <= 0:
        raise ValueError(f"window width must be positive, got {d}")
    rows = []
    pb = schedule.precision_bits
    first = schedule.entries[0]
    b1 = notched.knot_position("b", first.n_m, pb)
    f1 = mix.f1.density()
    cross = conv.mixture_cross_mass(mix, b1, d)
    f_b = f1.eval(b1)
    full = conv.mixture_local_conv(mix, b1, d)
    local_f = mix.q1 * f1.interval_mass(b1, d)
    rows.append(ProbeRow(
        probe="blowup_exact", x_or_n=f"m1_b{first.n_m}",
        value=cross / (d * f_b),
        aux={"lower_bound": first.lower_bound,
             "conv_over_window_mass": full / local_f if local_f else Fraction(0),
             "window": d}))
    for entry in schedule.entries[1:]:
        rows.append(ProbeRow(
            probe="blowup_lower_bound", x_or_n=f"m{entry.m}",
            value=entry.lower_bound,
            aux={"n_m": entry.n_m, "logf_b": entry.logf_b,
                 "mass": entry.mass}))
    return rows
