"""Fubini-Study speed of parametrized curves in P^2.

Normalization: a projective line has diameter pi/2, so the chordal distance
between [x] and [y] is |x ^ y| / (|x| |y|) and the speed of a lift X(theta) is
|X ^ X'| / |X|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

from .henon import AffinePoint, ProjectivePoint
from .precision import is_mp

_CHART_AXES = {0: (1, 2), 1: (0, 2), 2: (0, 1)}


@dataclass(frozen=True)
class TangentSample:
    """A point with a velocity written in one of its affine charts.

    ``chart`` is the index of the homogeneous coordinate set to 1 (2 is the
    usual (z, w) chart); ``velocity`` are the derivatives of the two remaining
    coordinates in increasing index order.
    """

    point: ProjectivePoint
    velocity: tuple
    chart: int = 2

    def __post_init__(self):
        if self.point.coords[self.chart] == 0:
            raise ValueError("point is not in the requested chart")
        if not all(_finite(v) for v in self.velocity):
            raise ValueError("velocity must be finite")

    @classmethod
    def from_affine(cls, x: AffinePoint, v) -> TangentSample:
        return cls(ProjectivePoint(x.z, x.w, 1), (v[0], v[1]), chart=2)

    @classmethod
    def from_lift(cls, X, dX, chart: int | None = None) -> TangentSample:
        """Sample from a homogeneous lift X and its derivative dX."""
        if chart is None:
            chart = max(range(3), key=lambda i: abs(X[i]))
        i, j = _CHART_AXES[chart]
        p = X[chart]
        vel = ((dX[i] * p - X[i] * dX[chart]) / (p * p), (dX[j] * p - X[j] * dX[chart]) / (p * p))
        return cls(ProjectivePoint(*X), vel, chart)

    def chart_coordinates(self):
        c = self.point.coords
        i, j = _CHART_AXES[self.chart]
        return c[i] / c[self.chart], c[j] / c[self.chart]

    def in_chart(self, chart: int) -> TangentSample:
        return TangentSample.from_lift(*self.lift(), chart=chart)

    def lift(self):
        """(X, dX) with X_chart = 1 and dX_chart = 0."""
        u = self.chart_coordinates()
        i, j = _CHART_AXES[self.chart]
        X = [0, 0, 0]
        dX = [0, 0, 0]
        X[self.chart], X[i], X[j] = 1, u[0], u[1]
        dX[i], dX[j] = self.velocity
        return tuple(X), tuple(dX)


def _finite(v) -> bool:
    if is_mp(v):
        return mpmath.isfinite(v.real) and mpmath.isfinite(v.imag)
    return bool(np.isfinite(v))


def _sqrt(x):
    return mpmath.sqrt(x) if is_mp(x) else math.sqrt(max(float(x), 0.0))


def fs_speed(s: TangentSample) -> float:
    u1, u2 = s.chart_coordinates()
    v1, v2 = s.velocity
    q = 1 + abs(u1) ** 2 + abs(u2) ** 2
    inner = (u1.conjugate() * v1 + u2.conjugate() * v2)
    num = q * (abs(v1) ** 2 + abs(v2) ** 2) - abs(inner) ** 2
    if num < 0:
        num = 0
    return float(_sqrt(num) / q)


def fs_speed_lift(X, dX) -> float:
    """|X ^ dX| / |X|^2 for any lift (scalar or mpmath entries)."""
    s = max((abs(c) for c in X))
    X = [c / s for c in X]
    dX = [c / s for c in dX]
    wedge = 0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        wedge += abs(X[i] * dX[j] - X[j] * dX[i]) ** 2
    norm2 = sum(abs(c) ** 2 for c in X)
    return float(_sqrt(wedge) / norm2)


def fs_speed_affine_array(z, w, dz, dw) -> np.ndarray:
    """Vectorized speed of the lift (z, w, 1) with velocity (dz, dw, 0).

    The lift is rescaled by max(|z|, |w|, 1) first so coordinates near 1e150
    do not overflow the wedge products.
    """
    z, w, dz, dw = (np.asarray(v, dtype=complex) for v in (z, w, dz, dw))
    s = np.maximum(np.maximum(np.abs(z), np.abs(w)), 1.0)
    X0, X1, X2 = z / s, w / s, 1.0 / s
    V0, V1 = dz / s, dw / s
    wedge = np.abs(X0 * V1 - X1 * V0) ** 2 + np.abs(X2 * V0) ** 2 + np.abs(X2 * V1) ** 2
    norm2 = np.abs(X0) ** 2 + np.abs(X1) ** 2 + X2**2
    return np.sqrt(wedge) / norm2


def chordal_distance(x: ProjectivePoint, y: ProjectivePoint) -> float:
    X, Y = x.coords, y.coords
    wedge = 0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        wedge += abs(X[i] * Y[j] - X[j] * Y[i]) ** 2
    nx = sum(abs(c) ** 2 for c in X)
    ny = sum(abs(c) ** 2 for c in Y)
    return float(_sqrt(wedge / (nx * ny)))


def fs_distance(x: ProjectivePoint, y: ProjectivePoint) -> float:
    return math.asin(min(1.0, chordal_distance(x, y)))


Curve = Callable[[complex], TangentSample]


def curve_speed(curve: Curve, theta: complex) -> float:
    s = curve(theta)
    best = s.point.pivot
    if best != s.chart:
        s = s.in_chart(best)
    return fs_speed(s)


def _speeds(curve, thetas: np.ndarray) -> np.ndarray:
    vec = getattr(curve, "speeds", None)
    if vec is not None:
        return np.asarray(vec(thetas), dtype=float)
    return np.array([curve_speed(curve, t) for t in thetas.ravel()]).reshape(thetas.shape)


def compass_maximize(fun: Callable[[complex], float], start: complex, value: float, step: float,
                     min_step: float, inside: Callable[[complex], bool] | None = None):
    """Compass search in the plane: try the 8 neighbours at ``step``, move to
    the best improvement, otherwise halve the step until ``min_step``."""
    x, fx = start, value
    dirs = [complex(math.cos(k * math.pi / 4), math.sin(k * math.pi / 4)) for k in range(8)]
    while step >= min_step:
        cand = [x + step * d for d in dirs]
        cand = [c for c in cand if inside is None or inside(c)]
        vals = [fun(c) for c in cand]
        k = max(range(len(cand)), key=lambda i: vals[i], default=None)
        if k is not None and vals[k] > fx:
            x, fx = cand[k], vals[k]
        else:
            step /= 2
    return fx, x


def _tie_key(value: float, theta: complex):
    return (-value, abs(theta), math.atan2(theta.imag, theta.real) % (2 * math.pi))


def sup_speed_on_disc(curve, center: complex, radius: float, grid: int,
                      min_step: float = 1e-6, starts: int = 4):
    """Max of the FS speed over the closed disc, with its location.

    Polar grid (radii i*radius/grid, angles 2 pi k/grid, so doubling ``grid``
    refines the point set), then compass refinement from the best ``starts``
    grid points. Ties go to the smallest |theta|, then the smallest argument.
    """
    if grid < 8:
        raise ValueError("grid must be >= 8")
    r = radius * np.arange(grid + 1) / grid
    ang = 2 * np.pi * np.arange(grid) / grid
    offsets = (r[1:, None] * np.exp(1j * ang[None, :])).ravel()
    thetas = np.concatenate([[0j], offsets]) + center
    vals = _speeds(curve, thetas)
    order = sorted(range(len(thetas)), key=lambda i: _tie_key(vals[i], complex(thetas[i]) - center))
    inside = lambda t: abs(t - center) <= radius
    fun = lambda t: float(_speeds(curve, np.array([t]))[0])
    best = (float(vals[order[0]]), complex(thetas[order[0]]))
    if radius == 0 or best[0] == 0:
        return best
    step = radius / grid
    for i in order[:starts]:
        val, loc = compass_maximize(fun, complex(thetas[i]), float(vals[i]), step, min_step, inside)
        if _tie_key(val, loc - center) < _tie_key(best[0], best[1] - center):
            best = (val, loc)
    return best
