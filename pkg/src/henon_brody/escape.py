"""Escape-time classification (U+/K+, U-/K-), the escape-rate Green function
and boundary sampling of J+ on complex line sections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import mpmath
import numpy as np

from .errors import GreenUndecided
from .henon import AffinePoint, HenonMap
from .precision import is_mp

Classification = Literal["escaping-forward", "bounded-forward", "undecided"]
ESCAPING, BOUNDED, UNDECIDED = "escaping-forward", "bounded-forward", "undecided"
CLASS_CODES = {ESCAPING: 1, BOUNDED: 0, UNDECIDED: -1}

RECURRENCE_TOL = 1e-6
HIGH_PRECISION_SWITCH = 1e100


@dataclass(frozen=True)
class FiltrationRadius:
    R: float


@dataclass(frozen=True)
class EscapeRecord:
    classification: Classification
    n_escape: int | None = None
    green_plus: float | None = None

    def __post_init__(self):
        if (self.classification == ESCAPING) != (self.n_escape is not None):
            raise ValueError("n_escape is present exactly for escaping points")
        if self.classification == BOUNDED and self.green_plus not in (None, 0.0):
            raise ValueError("bounded points have green_plus == 0")


def _ring_margin(f: HenonMap, R: float, n_angles: int = 720) -> float:
    """min over |z| = R of |p(z)| - (2 + |a|) R.

    Non-negative exactly when |p(z) - a w| >= 2|z| for all |z| = R, |w| <= R
    (the worst w is aligned against p(z)).
    """
    z = R * np.exp(2j * np.pi * np.arange(n_angles) / n_angles)
    return float(np.min(np.abs(f.p(z))) - (2 + abs(f.a)) * R)


def _holds_beyond(f: HenonMap, R: float, R_safe: float) -> bool:
    if R >= R_safe:
        return _ring_margin(f, R) >= 0
    radii = np.geomspace(R, R_safe, 24)
    return all(_ring_margin(f, r) >= 0 for r in radii)


@lru_cache(maxsize=32)
def filtration_radius(f: HenonMap) -> FiltrationRadius:
    """Smallest R (dyadic search, then bisection) with |p(z) - a w| >= 2|z|
    whenever |z| >= R and |w| <= |z|.

    Beyond ``R_safe = max(1, sum |c_k|, k < d) + 2 + |a|`` the inequality holds
    analytically, so ring samples are only needed on [R, R_safe].
    """
    lower = sum(abs(c) for c in f.p.coefficients[:-1])
    R_safe = max(1.0, lower) + 2 + abs(f.a)
    k = -4
    while not _holds_beyond(f, 2.0**k, R_safe):
        k += 1
    hi = 2.0**k
    lo = hi / 2
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if _holds_beyond(f, mid, R_safe):
            hi = mid
        else:
            lo = mid
    return FiltrationRadius(hi)


def in_forward_escape_region(x: AffinePoint, R: float) -> bool:
    az = abs(x.z)
    return az >= R and az >= abs(x.w)


def in_backward_escape_region(x: AffinePoint, R: float) -> bool:
    aw = abs(x.w)
    return aw >= R and aw >= abs(x.z)


def _in_bidisk(x: AffinePoint, R: float) -> bool:
    return abs(x.z) <= R and abs(x.w) <= R


def _classify(step, escaped, x: AffinePoint, n_max: int, R: float) -> EscapeRecord:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if escaped(x, R):
        return EscapeRecord(ESCAPING, 0)
    history: list[AffinePoint] = [x] if _in_bidisk(x, R) else []
    for n in range(1, n_max + 1):
        x = AffinePoint(*step(x.z, x.w))
        if escaped(x, R):
            return EscapeRecord(ESCAPING, n)
        if _in_bidisk(x, R):
            for y in history:
                if abs(x.z - y.z) < RECURRENCE_TOL and abs(x.w - y.w) < RECURRENCE_TOL:
                    return EscapeRecord(BOUNDED, green_plus=0.0)
            history.append(x)
    return EscapeRecord(UNDECIDED)


def classify_forward(f: HenonMap, x: AffinePoint, n_max: int = 200,
                     R: float | None = None) -> EscapeRecord:
    """Forward escape classification.

    Escaping once the orbit enters {|z| >= max(R, |w|)}. Bounded once two
    orbit points inside the filtration bidisk come within ``RECURRENCE_TOL``
    of each other. Anything else after ``n_max`` steps is undecided.
    """
    R = filtration_radius(f).R if R is None else R
    return _classify(f.forward, in_forward_escape_region, x, n_max, R)


def classify_backward(f: HenonMap, x: AffinePoint, n_max: int = 200,
                      R: float | None = None) -> EscapeRecord:
    R = filtration_radius(f).R if R is None else R
    return _classify(f.inverse, in_backward_escape_region, x, n_max, R)


def _log_plus_norm(x: AffinePoint):
    if is_mp(x.z) or is_mp(x.w):
        return max(0, mpmath.log(mpmath.sqrt(abs(x.z) ** 2 + abs(x.w) ** 2)))
    r = math.hypot(abs(x.z), abs(x.w))
    return math.log(r) if r > 1 else 0.0


def green_plus(f: HenonMap, x: AffinePoint, n_max: int = 200, tol: float = 1e-9,
               R: float | None = None) -> float:
    """g+(x) estimated as d^-n log+ ||f^n(x)||, stopped once stable to ``tol``.

    Returns 0 for points detected as bounded-forward (see ``classify_forward``).
    Orbits larger than 1e100 continue in mpmath, so the estimate never
    overflows. Raises ``GreenUndecided`` if the sequence has not stabilized
    after ``n_max`` steps.
    """
    R = filtration_radius(f).R if R is None else R
    d = f.d
    escaped = in_forward_escape_region(x, R)
    history: list[AffinePoint] = [] if escaped or not _in_bidisk(x, R) else [x]
    prev = max(0.0, float(_log_plus_norm(x)))
    scale = 1.0
    for n in range(1, n_max + 1):
        if not is_mp(x.z) and max(abs(x.z), abs(x.w)) > HIGH_PRECISION_SWITCH:
            x = AffinePoint(mpmath.mpc(x.z), mpmath.mpc(x.w))
        x = AffinePoint(*f.forward(x.z, x.w))
        scale /= d
        cur = max(0.0, float(_log_plus_norm(x) * scale))
        if not escaped:
            escaped = in_forward_escape_region(x, R)
            if not escaped and _in_bidisk(x, R):
                for y in history:
                    if abs(x.z - y.z) < RECURRENCE_TOL and abs(x.w - y.w) < RECURRENCE_TOL:
                        return 0.0
                history.append(x)
        if escaped and abs(cur - prev) < tol:
            return cur
        if not escaped and n == n_max and abs(cur - prev) < tol:
            return cur
        prev = cur
    raise GreenUndecided("Green function did not stabilize", estimate=prev, n_max=n_max)


# ---------------------------------------------------------------------------
# grids on complex line sections


@dataclass(frozen=True)
class Section:
    """Window of the complex line {base + s * direction}, s in a rectangle."""

    base: AffinePoint = AffinePoint(0j, 0j)
    direction: AffinePoint = AffinePoint(1 + 0j, 1 + 0j)
    center: complex = 0j
    half_width: float = 5.0
    half_height: float = 5.0

    def parameters(self, grid: tuple[int, int]) -> np.ndarray:
        """(rows, cols) array of s values; row 0 is the top (largest Im s)."""
        nx, ny = grid
        if nx < 2 or ny < 2:
            raise ValueError("grid must be at least 2x2")
        re = self.center.real + np.linspace(-self.half_width, self.half_width, nx)
        im = self.center.imag + np.linspace(self.half_height, -self.half_height, ny)
        return re[None, :] + 1j * im[:, None]

    def points(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.base.z + s * self.direction.z, self.base.w + s * self.direction.w


@dataclass
class GridClassification:
    s: np.ndarray
    classes: np.ndarray  # CLASS_CODES values
    n_escape: np.ndarray  # -1 where not escaping
    green: np.ndarray  # nan where undecided


def classify_grid(f: HenonMap, z: np.ndarray, w: np.ndarray, n_max: int = 200,
                  R: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``classify_forward`` over arrays; identical decisions.

    Returns (class codes, n_escape) with n_escape = -1 for non-escaping points.
    """
    R = filtration_radius(f).R if R is None else R
    shape = np.shape(z)
    z = np.asarray(z, dtype=complex).ravel().copy()
    w = np.asarray(w, dtype=complex).ravel().copy()
    codes = np.full(z.size, CLASS_CODES[UNDECIDED], dtype=np.int8)
    n_esc = np.full(z.size, -1, dtype=np.int64)

    def _escaped(z, w):
        az = np.abs(z)
        return (az >= R) & (az >= np.abs(w))

    esc = _escaped(z, w)
    codes[esc] = CLASS_CODES[ESCAPING]
    n_esc[esc] = 0
    idx = np.flatnonzero(~esc)
    z, w = z[idx], w[idx]
    inside = (np.abs(z) <= R) & (np.abs(w) <= R)
    hist_z = [np.where(inside, z, np.nan)]
    hist_w = [np.where(inside, w, np.nan)]
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            if idx.size == 0:
                break
            z, w = f.p(z) - f.a * w, z
            esc = _escaped(z, w)
            inside = ~esc & (np.abs(z) <= R) & (np.abs(w) <= R)
            Hz, Hw = np.array(hist_z), np.array(hist_w)
            rec = inside & np.any(
                (np.abs(Hz - z) < RECURRENCE_TOL) & (np.abs(Hw - w) < RECURRENCE_TOL), axis=0
            )
            codes[idx[esc]] = CLASS_CODES[ESCAPING]
            n_esc[idx[esc]] = n
            codes[idx[rec]] = CLASS_CODES[BOUNDED]
            keep = ~(esc | rec)
            hist_z = [h[keep] for h in hist_z] + [np.where(inside, z, np.nan)[keep]]
            hist_w = [h[keep] for h in hist_w] + [np.where(inside, w, np.nan)[keep]]
            idx, z, w = idx[keep], z[keep], w[keep]
    return codes.reshape(shape), n_esc.reshape(shape)


def green_grid(f: HenonMap, z: np.ndarray, w: np.ndarray, codes: np.ndarray,
               n_max: int = 200, tol: float = 1e-9, R: float | None = None) -> np.ndarray:
    """g+ on a grid: 0 on bounded points, scalar ``green_plus`` elsewhere."""
    R = filtration_radius(f).R if R is None else R
    out = np.zeros(np.shape(z))
    for i in zip(*np.nonzero(codes != CLASS_CODES[BOUNDED])):
        try:
            out[i] = green_plus(f, AffinePoint(complex(z[i]), complex(w[i])), n_max, tol, R)
        except GreenUndecided:
            out[i] = np.nan
    return out


def classify_section(f: HenonMap, section: Section, grid: tuple[int, int], n_max: int = 200,
                     with_green: bool = True, tol: float = 1e-9) -> GridClassification:
    R = filtration_radius(f).R
    s = section.parameters(grid)
    z, w = section.points(s)
    codes, n_esc = classify_grid(f, z, w, n_max, R)
    green = green_grid(f, z, w, codes, n_max, tol, R) if with_green else np.full(s.shape, np.nan)
    return GridClassification(s, codes, n_esc, green)


def boundary_mask(codes: np.ndarray) -> np.ndarray:
    """Cells whose closed 4-neighborhood holds both escaping and non-escaping codes."""
    esc = codes == CLASS_CODES[ESCAPING]
    stay = ~esc
    any_esc = esc.copy()
    any_stay = stay.copy()
    for src, dst in ((esc, any_esc), (stay, any_stay)):
        dst[1:, :] |= src[:-1, :]
        dst[:-1, :] |= src[1:, :]
        dst[:, 1:] |= src[:, :-1]
        dst[:, :-1] |= src[:, 1:]
    return any_esc & any_stay


def sample_Jplus(f: HenonMap, section: Section, grid: tuple[int, int],
                 n_max: int = 200) -> list[AffinePoint]:
    """Grid points on the numerical boundary of K+ within a section window.

    Non-escaping points (bounded or undecided at depth ``n_max``) form the K+
    side of the boundary.
    """
    s = section.parameters(grid)
    z, w = section.points(s)
    codes, _ = classify_grid(f, z, w, n_max)
    mask = boundary_mask(codes)
    return [AffinePoint(complex(a), complex(b)) for a, b in zip(z[mask], w[mask])]
