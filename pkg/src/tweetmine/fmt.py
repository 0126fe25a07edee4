"""Deterministic decimal rendering of exact rationals."""

from fractions import Fraction


def fixed(value, digits: int) -> str:
    """Render ``value`` with exactly ``digits`` fractional digits, rounding half to even.

    >>> fixed(Fraction(9, 616), 9)
    '0.014610390'
    >>> fixed(Fraction(1, 8), 2)
    '0.12'
    """
    q = Fraction(value)
    scaled = round(q * 10**digits)  # Fraction.__round__ is half-even
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    if digits == 0:
        return f"{sign}{scaled}"
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def rational_json(value: Fraction) -> dict:
    value = Fraction(value)
    return {"numerator": value.numerator, "denominator": value.denominator, "value": float(value)}
