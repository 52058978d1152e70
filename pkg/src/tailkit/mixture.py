"""The two-sided mixture and its blow-up atom schedule.

The negative part of the mixture is the law of ``-X2`` where ``X2`` places
mass ``c * L(n_m)**(-1/3)`` on an interval pinned between the threshold
knots of block ``n_m``, along the schedule ``n_m = floor(exp(m**4))``.
Each interval's mass is carried by a single atom at the interval midpoint
(any placement inside the interval preserves the blow-up bound, and an atom
keeps every convolution exact).

Only the m=1 atom has a materializable position; for m >= 2 the block index
``n_m`` is astronomically large, so those entries are kept symbolically:
their masses and the diverging lower-bound series ``c * L(n_m)**(1/6)`` are
exact rationals built from snapped constants, while their positions (never
needed for the series) stay unmaterialized.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from tailkit.errors import PrecisionFailure
from tailkit.notched import NotchedDensity, knot_logf, knot_position, threshold_knots
from tailkit.numerics import DEFAULT_PRECISION, LogValue, log_nat, root_snap
from tailkit.render import decimal_str

RESIDUAL_FRACTION = Fraction(1, 20)
RESIDUAL_VALUE = Fraction(1)


@dataclass(frozen=True)
class AtomList:
    """Atoms of X2: (value, mass) pairs plus a residual atom.

    ``value`` is None for atoms whose position is beyond any dense support
    (they still carry mass).  Masses and the residual sum to 1 exactly.
    """

    atoms: tuple[tuple[Optional[Fraction], Fraction], ...]
    residual: tuple[Fraction, Fraction]

    def __post_init__(self):
        total = self.residual[1]
        if self.residual[0] <= 0 or self.residual[1] < 0:
            raise ValueError("residual atom needs a positive value and mass >= 0")
        for v, p in self.atoms:
            if p <= 0:
                raise ValueError(f"atom masses must be positive, got {p}")
            if v is not None and v <= 0:
                raise ValueError(f"atom values must be positive, got {v}")
            total += p
        if total != 1:
            raise ValueError(f"atom masses plus residual must equal 1, got {total}")


@dataclass(frozen=True)
class MixtureSpec:
    """Weights and parts of the two-sided distribution.

    ``f1`` is the absolutely continuous positive part; ``f2`` the discrete
    negative part, stored through the positive values of X2.
    """

    q1: Fraction
    q2: Fraction
    f1: NotchedDensity
    f2: AtomList

    def __post_init__(self):
        object.__setattr__(self, "q1", Fraction(self.q1))
        object.__setattr__(self, "q2", Fraction(self.q2))
        if not (0 < self.q1 <= 1) or self.q1 + self.q2 != 1:
            raise ValueError("need q1 in (0, 1] with q1 + q2 = 1")


@dataclass(frozen=True)
class ScheduleEntry:
    m: int
    n_m: int
    mass: Fraction
    value: Optional[Fraction]       # position of the X2 atom, when dense
    logf_b: LogValue                # log2 f0 at b_{n_m}
    lower_bound: Fraction           # c * L(n_m)**(1/6)


@dataclass(frozen=True)
class BlowupSchedule:
    m_max: int
    entries: tuple[ScheduleEntry, ...]
    c: Fraction
    residual_mass: Fraction
    precision_bits: int


def schedule_index(m: int, precision_bits: int = DEFAULT_PRECISION) -> int:
    """floor(exp(m**4)) with a certified floor.

    Precision is raised until the fractional part is provably farther from
    the integers than the evaluation error bound.
    """
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    k = m ** 4
    wp = max(precision_bits, 3 * k // 2 + 192)
    for _ in range(8):
        with mpmath.workprec(wp):
            v = mpmath.exp(k)
            fl = mpmath.floor(v)
            frac = v - fl
            err = mpmath.ldexp(mpmath.mpf(1), int(mpmath.mag(v)) - wp + 4)
            if frac > err and (1 - frac) > err:
                return int(fl)
        wp *= 2
    raise PrecisionFailure(f"could not certify floor(exp({k}))")


def build_schedule(m_max: int,
                   precision_bits: int = DEFAULT_PRECISION,
                   residual_fraction: Fraction = RESIDUAL_FRACTION) -> BlowupSchedule:
    """Atom masses c * L(n_m)**(-1/3) with c normalizing them to
    1 - residual_fraction exactly; the residual parks the remaining mass at
    X2 = 1, where it only adds a benign shifted-density term."""
    if not isinstance(m_max, int) or m_max < 1:
        raise ValueError(f"m_max must be a positive integer, got {m_max!r}")
    residual_fraction = Fraction(residual_fraction)
    if not 0 <= residual_fraction < 1:
        raise ValueError("residual_fraction must lie in [0, 1)")
    indices = [schedule_index(m, precision_bits) for m in range(1, m_max + 1)]
    cbrt = [root_snap(log_nat(n, precision_bits), 3, precision_bits) for n in indices]
    inv_sum = sum(1 / u for u in cbrt)
    c = (1 - residual_fraction) / inv_sum

    entries = []
    for m, n_m, u in zip(range(1, m_max + 1), indices, cbrt):
        if m == 1:
            d_knot, s_knot = threshold_knots(n_m, precision_bits)
            b = knot_position("b", n_m, precision_bits)
            value: Optional[Fraction] = (d_knot.x + s_knot.x) / 2 - b
        else:
            value = None
        entries.append(ScheduleEntry(
            m=m, n_m=n_m, mass=c / u, value=value,
            logf_b=knot_logf("b", n_m, precision_bits),
            lower_bound=c * root_snap(log_nat(n_m, precision_bits), 6,
                                      precision_bits)))
    residual_mass = 1 - sum(e.mass for e in entries)
    return BlowupSchedule(m_max=m_max, entries=tuple(entries), c=c,
                          residual_mass=residual_mass,
                          precision_bits=precision_bits)


def blowup_lower_bound(schedule: BlowupSchedule, m: int) -> Fraction:
    """c * L(n_m)**(1/6): the diverging lower bound for row m."""
    if not 1 <= m <= schedule.m_max:
        raise ValueError(f"m={m} is outside the schedule (m_max={schedule.m_max})")
    return schedule.entries[m - 1].lower_bound


def atom_list(schedule: BlowupSchedule) -> AtomList:
    atoms = tuple((e.value, e.mass) for e in schedule.entries)
    return AtomList(atoms=atoms, residual=(RESIDUAL_VALUE, schedule.residual_mass))


def mixture_from_schedule(schedule: BlowupSchedule, f1: NotchedDensity,
                          q1: Fraction = Fraction(1, 2)) -> MixtureSpec:
    q1 = Fraction(q1)
    return MixtureSpec(q1=q1, q2=1 - q1, f1=f1, f2=atom_list(schedule))


def schedule_csv_lines(schedule: BlowupSchedule) -> list[str]:
    lines = ["m,n_m,mass,log2_f_b,lower_bound"]
    for e in schedule.entries:
        lines.append(",".join([
            str(e.m), str(e.n_m), decimal_str(e.mass),
            decimal_str(e.logf_b.log2mag), decimal_str(e.lower_bound)]))
    lines.append(f"residual,,{decimal_str(schedule.residual_mass)},,")
    return lines
