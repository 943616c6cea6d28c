"""Exact contour-method toolkit for finite-range spin models on Cayley trees."""

import os

__version__ = "0.1.0"

CAP_ENV = "CAYLEY_CONTOUR_CAP"
DEFAULT_CAP = 2_000_000


def enumeration_cap(cap=None):
    """Resolve an enumeration cap: explicit value, then environment, then default."""
    if cap is not None:
        return int(cap)
    return int(os.environ.get(CAP_ENV, DEFAULT_CAP))


class CapExceeded(RuntimeError):
    """An enumeration would exceed the configured size cap."""

    def __init__(self, what, size, cap):
        super().__init__(f"{what}: {size} exceeds enumeration cap {cap}")
        self.what = what
        self.size = size
        self.cap = cap
