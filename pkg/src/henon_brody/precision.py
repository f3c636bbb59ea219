"""Arithmetic precision plumbing.

Scalars are either Python ``complex`` (binary64) or ``mpmath.mpc``; most
numerical code in this package is written against plain arithmetic operators so
it runs unchanged on both. ``bits=None`` always means binary64.
"""

from __future__ import annotations

import contextlib
import math
import os

import mpmath

# binary64 coordinates beyond this modulus are treated as escaped
ESCAPE_MODULUS = 1e150
PRECISION_ENV = "HENON_PRECISION_BITS"


def env_bits() -> int | None:
    raw = os.environ.get(PRECISION_ENV)
    if not raw:
        return None
    bits = int(raw)
    if bits < 53:
        raise ValueError(f"{PRECISION_ENV} must be >= 53, got {bits}")
    return bits


def ladder_bits(n: int, period: int, lambda_u: complex) -> int:
    """Mantissa bits for pullback depth ``n`` (env override wins)."""
    override = env_bits()
    if override is not None:
        return override
    return 64 + math.ceil(1.2 * n * period * math.log2(abs(lambda_u)))


def workprec(bits: int | None):
    return mpmath.workprec(bits) if bits else contextlib.nullcontext()


def is_mp(x) -> bool:
    return isinstance(x, (mpmath.mpc, mpmath.mpf))


def to_mp(x):
    return mpmath.mpc(x)


def modulus(x) -> float:
    """|x| as a float; inf when an mpmath value exceeds binary64 range."""
    try:
        return float(abs(x))
    except OverflowError:
        return math.inf


def log2_modulus(x) -> float:
    if x == 0:
        return -math.inf
    if is_mp(x):
        return float(mpmath.log(abs(x), 2))
    return math.log2(abs(x))


def finite_binary64(*values) -> bool:
    return all(abs(v) <= ESCAPE_MODULUS for v in values)
