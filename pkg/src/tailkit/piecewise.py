"""Piecewise polynomials on a bounded support, with exact calculus.

A :class:`PiecewisePoly` is a strictly increasing breakpoint sequence plus
one coefficient quadruple per segment, written in the local variable
``u = x - x_lo`` of that segment.  Degree is capped at 3: the only product
this package ever needs is the convolution of two linear pieces.

Segment ownership is right-continuous: segment ``i`` owns ``(x_i, x_{i+1}]``
and the first segment additionally owns the left support end.  All
operations are pure and exact over ``Fraction``; instances are immutable.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

DEGREE_CAP = 3


@dataclass(frozen=True)
class Knot:
    """A breakpoint together with the function value there."""

    x: Fraction
    f: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "f", Fraction(self.f))


@dataclass(frozen=True)
class PiecewisePoly:
    breakpoints: tuple[Fraction, ...]
    coeffs: tuple[tuple[Fraction, Fraction, Fraction, Fraction], ...]
    continuous: bool = False
    density: bool = False

    def __post_init__(self):
        breaks = tuple(Fraction(x) for x in self.breakpoints)
        if len(breaks) < 2:
            raise ValueError("need at least two breakpoints")
        for a, b in zip(breaks, breaks[1:]):
            if not a < b:
                raise ValueError(f"breakpoints must strictly increase ({a} !< {b})")
        coeffs = tuple(
            tuple(Fraction(c) for c in seg) + (Fraction(0),) * (4 - len(seg))
            for seg in self.coeffs)
        if len(coeffs) != len(breaks) - 1:
            raise ValueError("segment count must be breakpoint count - 1")
        for seg in coeffs:
            if len(seg) != 4:
                raise ValueError("segments take at most 4 coefficients (degree <= 3)")
        object.__setattr__(self, "breakpoints", breaks)
        object.__setattr__(self, "coeffs", coeffs)

    # ------------------------------------------------------------------
    @property
    def support(self) -> tuple[Fraction, Fraction]:
        return self.breakpoints[0], self.breakpoints[-1]

    @property
    def degree(self) -> int:
        d = 0
        for seg in self.coeffs:
            for k in (3, 2, 1):
                if seg[k] != 0:
                    d = max(d, k)
                    break
        return d

    def _segment_of(self, x: Fraction) -> int:
        lo, hi = self.support
        if x < lo or x > hi:
            raise ValueError(f"{x} is outside the support [{lo}, {hi}]")
        idx = bisect_left(self.breakpoints, x) - 1
        return max(idx, 0)

    def eval(self, x) -> Fraction:
        """Exact value at x; right-continuous at interior breakpoints."""
        x = Fraction(x)
        i = self._segment_of(x)
        u = x - self.breakpoints[i]
        c0, c1, c2, c3 = self.coeffs[i]
        return ((c3 * u + c2) * u + c1) * u + c0

    def _segment_integral(self, i: int, u_lo: Fraction, u_hi: Fraction) -> Fraction:
        c0, c1, c2, c3 = self.coeffs[i]

        def anti(u: Fraction) -> Fraction:
            return (((c3 * u / 4 + Fraction(c2, 3)) * u + c1 / 2) * u + c0) * u

        return anti(u_hi) - anti(u_lo)

    def integral(self, lo, hi) -> Fraction:
        """Exact integral over [lo, hi]; additive in the bounds."""
        lo, hi = Fraction(lo), Fraction(hi)
        s_lo, s_hi = self.support
        if lo > hi:
            raise ValueError(f"reversed bounds: {lo} > {hi}")
        if lo < s_lo or hi > s_hi:
            raise ValueError(f"[{lo}, {hi}] exceeds the support [{s_lo}, {s_hi}]")
        total = Fraction(0)
        breaks = self.breakpoints
        i = max(bisect_left(breaks, lo) - 1, 0)
        while i < len(self.coeffs) and breaks[i] < hi:
            a = max(breaks[i], lo)
            b = min(breaks[i + 1], hi)
            if b > a:
                total += self._segment_integral(i, a - breaks[i], b - breaks[i])
            i += 1
        return total

    def interval_mass(self, x, d) -> Fraction:
        """Mass over (x, x+d] clamped to the support; 0 when disjoint."""
        x, d = Fraction(x), Fraction(d)
        if d <= 0:
            raise ValueError(f"window width must be positive, got {d}")
        s_lo, s_hi = self.support
        lo = max(x, s_lo)
        hi = min(x + d, s_hi)
        if hi <= lo:
            return Fraction(0)
        return self.integral(lo, hi)

    def tail_mass(self, x) -> Fraction:
        """Mass over (x, top-of-support]."""
        x = Fraction(x)
        self._segment_of(x)
        return self.integral(x, self.support[1])

    def total_mass(self) -> Fraction:
        return self.integral(*self.support)

    def normalize(self) -> tuple["PiecewisePoly", Fraction]:
        """Scale to unit mass; returns (scaled function, original mass)."""
        mass = self.total_mass()
        if mass <= 0:
            raise ValueError(f"cannot normalize: total mass {mass} is not positive")
        scaled = tuple(tuple(c / mass for c in seg) for seg in self.coeffs)
        return (PiecewisePoly(self.breakpoints, scaled,
                              continuous=self.continuous, density=self.density),
                mass)

    def scale(self, factor) -> "PiecewisePoly":
        factor = Fraction(factor)
        scaled = tuple(tuple(c * factor for c in seg) for seg in self.coeffs)
        return PiecewisePoly(self.breakpoints, scaled,
                             continuous=self.continuous,
                             density=self.density and factor > 0)


def from_linear_knots(knots: Iterable) -> PiecewisePoly:
    """Linear interpolation through knots, one degree-1 segment per gap.

    Evaluation at every knot abscissa reproduces the knot value exactly.
    """
    pts = []
    for k in knots:
        if isinstance(k, Knot):
            pts.append((k.x, k.f))
        else:
            x, f = k
            pts.append((Fraction(x), Fraction(f)))
    if len(pts) < 2:
        raise ValueError("need at least two knots")
    for (x0, _), (x1, _) in zip(pts, pts[1:]):
        if not x0 < x1:
            raise ValueError(f"knot abscissas must strictly increase ({x0} !< {x1})")
    for _, f in pts:
        if f < 0:
            raise ValueError(f"knot values must be nonnegative, got {f}")
    breaks = tuple(x for x, _ in pts)
    coeffs = []
    for (x0, f0), (x1, f1) in zip(pts, pts[1:]):
        slope = (f1 - f0) / (x1 - x0)
        coeffs.append((f0, slope, Fraction(0), Fraction(0)))
    return PiecewisePoly(breaks, tuple(coeffs), continuous=True,
                         density=any(f > 0 for _, f in pts))


# --------------------------- serialization ---------------------------
#
# One knot or segment per line:
#   knot <x> <f>
#   seg <x_lo> <x_hi> <c0> <c1> <c2> <c3>
# Values are exact base-10 rational strings ("5", "-3/7"); lines starting
# with '#' are comments, except '# flags:' which records the construction
# flags so that load(dump(P)) reproduces P exactly.

def _fmt(q: Fraction) -> str:
    return str(q)


def dump_lines(p: PiecewisePoly) -> list[str]:
    lines = ["# tailkit piecewise v1"]
    flags = []
    if p.continuous:
        flags.append("continuous")
    if p.density:
        flags.append("density")
    lines.append("# flags: " + " ".join(flags))
    if p.continuous and p.degree <= 1:
        for i, x in enumerate(p.breakpoints[:-1]):
            lines.append(f"knot {_fmt(x)} {_fmt(p.coeffs[i][0])}")
        lines.append(f"knot {_fmt(p.breakpoints[-1])} {_fmt(p.eval(p.breakpoints[-1]))}")
    else:
        for i in range(len(p.coeffs)):
            c = p.coeffs[i]
            lines.append("seg " + " ".join(
                [_fmt(p.breakpoints[i]), _fmt(p.breakpoints[i + 1])]
                + [_fmt(ci) for ci in c]))
    return lines


def load_lines(lines: Sequence[str]) -> PiecewisePoly:
    flags: set[str] = set()
    knots: list[tuple[Fraction, Fraction]] = []
    segs: list[tuple[Fraction, ...]] = []
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("flags:"):
                flags.update(body[len("flags:"):].split())
            continue
        parts = line.split()
        if parts[0] == "knot" and len(parts) == 3:
            knots.append((Fraction(parts[1]), Fraction(parts[2])))
        elif parts[0] == "seg" and len(parts) == 7:
            segs.append(tuple(Fraction(v) for v in parts[1:]))
        else:
            raise ValueError(f"unrecognized piecewise line: {raw!r}")
    if knots and segs:
        raise ValueError("a piecewise file may not mix knot and seg lines")
    if knots:
        return from_linear_knots(knots)
    if not segs:
        raise ValueError("no knot or seg lines found")
    breaks = [segs[0][0]]
    coeffs = []
    for seg in segs:
        if seg[0] != breaks[-1]:
            raise ValueError("seg lines must be contiguous and ordered")
        breaks.append(seg[1])
        coeffs.append(tuple(seg[2:]))
    return PiecewisePoly(tuple(breaks), tuple(coeffs),
                         continuous="continuous" in flags,
                         density="density" in flags)


def dump_text(p: PiecewisePoly) -> str:
    return "\n".join(dump_lines(p)) + "\n"


def load_text(text: str) -> PiecewisePoly:
    return load_lines(text.splitlines())
