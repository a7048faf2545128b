"""Reference helpers shared by the tests, written independently of the package."""

from decimal import ROUND_HALF_UP, Decimal


def round_away(v):
    """Exact round-half-away-from-zero of a float (Decimal holds the binary value exactly)."""
    return int(Decimal(float(v)).quantize(Decimal(1), rounding=ROUND_HALF_UP))
