"""Periodic orbits by damped multiple-shooting Newton, saddle certification and
hyperbolicity constants along an orbit."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import NotContracting
from .escape import filtration_radius
from .henon import AffinePoint, HenonMap, Jacobian2, iterate, orbit_jacobian

log = logging.getLogger(__name__)

DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class SaddleOrbit:
    period: int
    points: tuple[AffinePoint, ...]
    lambda_s: complex
    lambda_u: complex
    eigvec_s: tuple[complex, complex]
    eigvec_u: tuple[complex, complex]
    residual: float
    is_saddle: bool = True
    newton_ratio: float | None = field(default=None, compare=False)

    @property
    def P(self) -> AffinePoint:
        return self.points[0]


@dataclass(frozen=True)
class HyperbolicityEstimate:
    c: float
    lam: float
    depth: int
    norms: tuple[float, ...] = ()


def _canonical_phase(v: np.ndarray) -> tuple[complex, complex]:
    v = v / np.linalg.norm(v)
    for comp in v:
        if abs(comp) > 1e-14:
            v = v * (abs(comp) / comp)
            break
    return complex(v[0]), complex(v[1])


def _newton(f: HenonMap, X: np.ndarray, N: int, tol: float, max_iter: int):
    """Multiple-shooting Newton on F_i = f(x_i) - x_{i+1}; X has shape (N, 2)."""

    def residual(X):
        Z, W = X[:, 0], X[:, 1]
        img = np.stack([f.p(Z) - f.a * W, Z], axis=1)
        return (img - np.roll(X, -1, axis=0)).ravel()

    steps: list[float] = []
    with np.errstate(all="ignore"):
        F = residual(X)
        for _ in range(max_iter):
            normF = np.linalg.norm(F)
            if not np.isfinite(normF):
                return None, steps
            if normF <= tol * (1 + np.abs(X).max()):
                return X, steps
            J = np.zeros((2 * N, 2 * N), dtype=complex)
            for i in range(N):
                J[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = [[f.p.derivative(X[i, 0]), -f.a], [1, 0]]
                j = (i + 1) % N
                J[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] -= np.eye(2)
            try:
                delta = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                return None, steps
            t = 1.0
            for _ in range(21):
                X_new = X + t * delta.reshape(N, 2)
                F_new = residual(X_new)
                if np.linalg.norm(F_new) < normF:
                    break
                t *= 0.5
            else:
                return None, steps
            steps.append(t * float(np.linalg.norm(delta)))
            X, F = X_new, F_new
    return None, steps


def _true_period(f: HenonMap, x: AffinePoint, N: int) -> int:
    for k in range(1, N):
        if N % k:
            continue
        y = iterate(f, x, k)
        if abs(y.z - x.z) < DEDUP_TOL and abs(y.w - x.w) < DEDUP_TOL:
            return k
    return N


def _same_orbit(a: tuple[AffinePoint, ...], b: tuple[AffinePoint, ...]) -> bool:
    x = a[0]
    return any(abs(x.z - y.z) < DEDUP_TOL and abs(x.w - y.w) < DEDUP_TOL for y in b)


def _rotate_canonical(points: list[AffinePoint]) -> list[AffinePoint]:
    key = lambda x: (round(x.z.real, 9), round(x.z.imag, 9), round(x.w.real, 9), round(x.w.imag, 9))
    k = min(range(len(points)), key=lambda i: key(points[i]))
    return points[k:] + points[:k]


def default_seeds(f: HenonMap, n: int = 13) -> list[AffinePoint]:
    R = filtration_radius(f).R
    grid = np.linspace(-R, R, n)
    return [AffinePoint(complex(z, 1e-3), complex(w, -1e-3)) for z in grid for w in grid]


def make_orbit(f: HenonMap, points: list[AffinePoint], newton_ratio: float | None = None) -> SaddleOrbit:
    N = len(points)
    A = orbit_jacobian(f, points).to_array()
    evals, evecs = np.linalg.eig(A)
    order = np.argsort(np.abs(evals))
    ls, lu = complex(evals[order[0]]), complex(evals[order[1]])
    vs = _canonical_phase(evecs[:, order[0]])
    vu = _canonical_phase(evecs[:, order[1]])
    res = 0.0
    for i, x in enumerate(points):
        y = points[(i + 1) % N]
        fx = f.forward(x.z, x.w)
        res = max(res, math.hypot(abs(fx[0] - y.z), abs(fx[1] - y.w)))
    return SaddleOrbit(N, tuple(points), ls, lu, vs, vu, res,
                       is_saddle=abs(ls) < 1 < abs(lu), newton_ratio=newton_ratio)


def find_periodic(f: HenonMap, N: int, seeds: list[AffinePoint] | None = None,
                  tol: float = 1e-13, max_iter: int = 60) -> list[SaddleOrbit]:
    """All distinct orbits of exact period N reached from ``seeds``.

    Each seed x0 is spread into a multiple-shooting guess x_i = f^i(x0).
    Divergent seeds are dropped silently.
    """
    if N < 1:
        raise ValueError("period must be >= 1")
    seeds = default_seeds(f) if seeds is None else seeds
    found: list[tuple[tuple[AffinePoint, ...], float | None]] = []
    for seed in seeds:
        guess = [seed]
        with np.errstate(all="ignore"):
            for _ in range(N - 1):
                guess.append(AffinePoint(*f.forward(*guess[-1])))
        X0 = np.array([[x.z, x.w] for x in guess], dtype=complex)
        if not np.all(np.isfinite(X0)):
            continue
        X, steps = _newton(f, X0, N, tol, max_iter)
        if X is None:
            continue
        points = [AffinePoint(complex(r[0]), complex(r[1])) for r in X]
        if _true_period(f, points[0], N) != N:
            continue
        points = tuple(_rotate_canonical(points))
        if any(_same_orbit(points, other) for other, _ in found):
            continue
        ratio = None
        if len(steps) >= 2 and steps[-2] > 0:
            ratio = steps[-1] / steps[-2] ** 2
        found.append((points, ratio))
    orbits = [make_orbit(f, list(pts), ratio) for pts, ratio in found]
    orbits.sort(key=lambda o: (o.P.z.real, o.P.z.imag, o.P.w.real, o.P.w.imag))
    log.debug("period %d: %d orbits from %d seeds", N, len(orbits), len(seeds))
    return orbits


def _mp_stable_vector(f: HenonMap, orbit: SaddleOrbit):
    J = Jacobian2.identity()
    for x in orbit.points:
        J = Jacobian2(mpmath.mpc(f.p.derivative(mpmath.mpc(x.z))), mpmath.mpc(-f.a), 1, 0) @ J
    tr, det = J.trace(), J.det()
    disc = mpmath.sqrt(tr * tr - 4 * det)
    roots = ((tr + disc) / 2, (tr - disc) / 2)
    lam = min(roots, key=abs)
    cand1 = (J.a12, lam - J.a11)
    cand2 = (lam - J.a22, J.a21)
    v = max(cand1, cand2, key=lambda c: abs(c[0]) ** 2 + abs(c[1]) ** 2)
    nv = mpmath.sqrt(abs(v[0]) ** 2 + abs(v[1]) ** 2)
    return lam, (v[0] / nv, v[1] / nv)


def estimate_hyperbolicity(f: HenonMap, orbit: SaddleOrbit, depth: int,
                           bits: int | None = None) -> HyperbolicityEstimate:
    """Constants (c, lambda) with ||Df^n v_s|| <= c lambda^n for n <= depth.

    Transport runs in mpmath: rounding noise along E^u grows like
    (|lambda_u| / |lambda_s|)^(n/N) relative to the signal, so the default
    precision scales with ``depth``.
    """
    if not orbit.is_saddle:
        raise NotContracting("orbit is not a saddle")
    N = orbit.period
    lam = abs(orbit.lambda_s) ** (1.0 / N)
    if bits is None:
        bits = 64 + math.ceil(depth / N * math.log2(abs(orbit.lambda_u) / abs(orbit.lambda_s))) + 16
    with mpmath.workprec(bits):
        _, v = _mp_stable_vector(f, orbit)
        norms = [1.0]
        c = 1.0
        for n in range(1, depth + 1):
            x = orbit.points[(n - 1) % N]
            Jx = Jacobian2(mpmath.mpc(f.p.derivative(mpmath.mpc(x.z))), mpmath.mpc(-f.a), 1, 0)
            v = Jx.apply(v)
            nv = mpmath.sqrt(abs(v[0]) ** 2 + abs(v[1]) ** 2)
            norms.append(float(nv))
            c = max(c, float(nv / mpmath.mpf(lam) ** n))
            if n >= 2 * N and norms[n] > norms[n - N] * math.sqrt(lam**N):
                raise NotContracting("stable vector stopped contracting", n=n, bits=bits)
    return HyperbolicityEstimate(c, lam, depth, tuple(norms))
