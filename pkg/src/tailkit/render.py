"""Deterministic plain-text rendering of exact scalars.

CSV reports render rationals in decimal.  A rational whose expansion
terminates within the width budget is written exactly; anything else is
rounded half-up to a fixed number of significant digits.  Either way the
output is locale-free and byte-stable across runs, which is what report
consumers diff against.  Lossless round-tripping is the job of the
rational-string piecewise files, not of these reports.
"""

from __future__ import annotations

from fractions import Fraction

from tailkit.numerics import LogValue

SIG_DIGITS = 40
_EXACT_WIDTH = 80


def _floor_log10(num: int, den: int) -> int:
    """floor(log10(num/den)) for positive num, den."""
    e = len(str(num)) - len(str(den))
    while True:
        if e >= 0:
            ok = den * 10 ** e <= num
        else:
            ok = den <= num * 10 ** (-e)
        if ok:
            break
        e -= 1
    while True:
        e2 = e + 1
        if e2 >= 0:
            ok = den * 10 ** e2 <= num
        else:
            ok = den <= num * 10 ** (-e2)
        if not ok:
            break
        e = e2
    return e


def _positional(digits: str, e: int) -> str:
    """Place the decimal point of 0.digits * 10**(e+1)."""
    if e >= len(digits) - 1:
        return digits + "0" * (e - len(digits) + 1)
    if e >= 0:
        head, tail = digits[:e + 1], digits[e + 1:]
        tail = tail.rstrip("0")
        return head + ("." + tail if tail else "")
    body = "0" * (-e - 1) + digits
    body = body.rstrip("0")
    return "0." + (body if body else "0")


def decimal_str(q, sig: int = SIG_DIGITS) -> str:
    """Decimal rendering of a rational: exact when it fits, else rounded."""
    q = Fraction(q)
    if q == 0:
        return "0"
    sign = "-" if q < 0 else ""
    num, den = abs(q.numerator), q.denominator

    # exact expansion when den = 2^a * 5^b and the result is short enough
    d = den
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        shift = max(twos, fives)
        digits = str(num * 10 ** shift // den)
        text = _positional(digits, len(digits) - 1 - shift)
        if len(text) <= _EXACT_WIDTH:
            return sign + text

    e = _floor_log10(num, den)
    shift = sig - 1 - e
    if shift >= 0:
        scaled = (num * 10 ** shift * 2 // den + 1) // 2
    else:
        scaled = (num * 2 // (den * 10 ** (-shift)) + 1) // 2
    digits = str(scaled)
    if len(digits) > sig:  # rounding carried into a new leading digit
        digits = digits[:sig]
        e += 1
    digits = digits.rstrip("0") or "0"
    if -6 <= e <= sig + 6:
        return sign + _positional(digits, e)
    mantissa = digits[0] + ("." + digits[1:] if len(digits) > 1 else "")
    return f"{sign}{mantissa}e{e}"


def value_str(v) -> str:
    """Render a probe value: rationals in decimal, LogValues as log2:<...>."""
    if isinstance(v, LogValue):
        if v.sign == 0:
            return "0"
        prefix = "-" if v.sign < 0 else ""
        return f"{prefix}log2:{decimal_str(v.log2mag)}"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return decimal_str(v)
