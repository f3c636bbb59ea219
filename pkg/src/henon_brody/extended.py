"""Complex numbers as ``mant * 2**exp`` with numpy mantissas and int64 exponents.

Only what pairwise chordal distances need: products, differences, squared
moduli and square roots. Exponent range is unbounded in practice, so points
of the leaf far beyond binary64 range keep their relative precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

_SHIFT_FLOOR = -1100  # below this an aligned mantissa is exactly zero in binary64


@dataclass(frozen=True)
class Ext:
    mant: np.ndarray
    exp: np.ndarray

    def __getitem__(self, idx) -> Ext:
        return Ext(self.mant[idx], self.exp[idx])

    @property
    def shape(self):
        return self.mant.shape


def _normalize(mant: np.ndarray, exp: np.ndarray) -> Ext:
    scale = np.maximum(np.abs(mant.real), np.abs(mant.imag)) if np.iscomplexobj(mant) else np.abs(mant)
    _, e = np.frexp(scale)
    e = np.where(scale == 0, 0, e)
    if np.iscomplexobj(mant):
        m = np.ldexp(mant.real, -e) + 1j * np.ldexp(mant.imag, -e)
    else:
        m = np.ldexp(mant, -e)
    return Ext(m, (exp + e).astype(np.int64))


def from_complex(values) -> Ext:
    v = np.asarray(values, dtype=complex)
    return _normalize(v, np.zeros(v.shape, dtype=np.int64))


def from_mpc(values) -> Ext:
    mant = np.empty(len(values), dtype=complex)
    exp = np.zeros(len(values), dtype=np.int64)
    for k, c in enumerate(values):
        c = mpmath.mpc(c)
        if c == 0:
            mant[k] = 0
            continue
        e = int(mpmath.mag(c))
        mant[k] = complex(mpmath.ldexp(c.real, -e), mpmath.ldexp(c.imag, -e))
        exp[k] = e
    return _normalize(mant, exp)


def _ldexp(m: np.ndarray, shift: np.ndarray) -> np.ndarray:
    shift = np.maximum(shift, _SHIFT_FLOOR).astype(np.int64)
    if np.iscomplexobj(m):
        return np.ldexp(m.real, shift) + 1j * np.ldexp(m.imag, shift)
    return np.ldexp(m, shift)


def mul(a: Ext, b: Ext) -> Ext:
    return _normalize(a.mant * b.mant, a.exp + b.exp)


def add(a: Ext, b: Ext, sign: int = 1) -> Ext:
    az = a.mant == 0
    bz = b.mant == 0
    e = np.where(az, b.exp, np.where(bz, a.exp, np.maximum(a.exp, b.exp)))
    m = _ldexp(a.mant, a.exp - e) + sign * _ldexp(b.mant, b.exp - e)
    return _normalize(m, e)


def sub(a: Ext, b: Ext) -> Ext:
    return add(a, b, sign=-1)


def abs2(a: Ext) -> Ext:
    return _normalize(a.mant.real**2 + a.mant.imag**2, 2 * a.exp)


def sqrt(a: Ext) -> Ext:
    odd = a.exp % 2 != 0
    m = np.where(odd, a.mant * 2, a.mant)
    e = np.where(odd, a.exp - 1, a.exp)
    return _normalize(np.sqrt(m), e // 2)


def scale(a: Ext, factor: np.ndarray) -> Ext:
    return _normalize(a.mant * factor, a.exp)


def log2(a: Ext) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log2(np.abs(a.mant)) + a.exp


def to_number(mant: float, exp: int):
    """A float when representable, else an mpmath mpf."""
    if mant == 0:
        return 0.0
    if -1000 < exp < 1000:
        v = float(np.ldexp(mant, exp))
        if v != 0:
            return v
    return mpmath.ldexp(mpmath.mpf(mant), int(exp))
