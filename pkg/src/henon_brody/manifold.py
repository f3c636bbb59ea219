"""Entire parametrizations of stable-manifold leaves through saddle orbits.

Locally the leaf is the linearizing series psi_loc with
f^N(psi_loc(zeta)) = psi_loc(lambda_s zeta); globally
psi(Z) = f^(-N m)(psi_loc(lambda_s^m Z)) with the smallest m bringing
lambda_s^m Z into the validity disc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import EscapedRange, PrecisionExhausted, ResonanceConditioning
from .henon import AffinePoint, HenonMap, ProjectivePoint, orbit_jacobian
from .precision import ESCAPE_MODULUS, env_bits, is_mp
from .saddle import SaddleOrbit

CONJUGACY_TOL = 1e-8
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class StableManifoldChart:
    f: HenonMap
    orbit: SaddleOrbit
    coeffs: np.ndarray  # (M + 1, 2); row 0 is P, row 1 the unit stable eigenvector
    rho: float
    scale: complex = 1.0

    @property
    def lambda_s(self) -> complex:
        return self.orbit.lambda_s

    @property
    def period(self) -> int:
        return self.orbit.period

    @property
    def P(self) -> AffinePoint:
        return self.orbit.P

    def local(self, t):
        z, w = 0, 0
        for cz, cw in self.coeffs[::-1]:
            z = z * t + complex(cz)
            w = w * t + complex(cw)
        return z, w

    def local_derivative(self, t):
        M = len(self.coeffs) - 1
        dz, dw = 0, 0
        for k in range(M, 0, -1):
            cz, cw = self.coeffs[k]
            dz = dz * t + k * complex(cz)
            dw = dw * t + k * complex(cw)
        return dz, dw

    def local_array(self, t: np.ndarray):
        z = np.zeros_like(t, dtype=complex)
        w = np.zeros_like(t, dtype=complex)
        for cz, cw in self.coeffs[::-1]:
            z = z * t + cz
            w = w * t + cw
        return z, w

    def local_derivative_array(self, t: np.ndarray):
        M = len(self.coeffs) - 1
        dz = np.zeros_like(t, dtype=complex)
        dw = np.zeros_like(t, dtype=complex)
        for k in range(M, 0, -1):
            dz = dz * t + k * self.coeffs[k, 0]
            dw = dw * t + k * self.coeffs[k, 1]
        return dz, dw

    def depth(self, Z) -> int:
        """Smallest m >= 0 with |lambda_s^m Z| <= rho."""
        r = abs(Z)
        if r <= self.rho:
            return 0
        m = math.ceil(math.log(float(r) / self.rho) / -math.log(abs(self.lambda_s)))
        while abs(self.lambda_s) ** m * r > self.rho:
            m += 1
        while m > 0 and abs(self.lambda_s) ** (m - 1) * r <= self.rho:
            m -= 1
        return m


def _series_mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.convolve(x, y)[: len(x)]


def _apply_map_series(f: HenonMap, x: np.ndarray, y: np.ndarray):
    acc = np.zeros_like(x)
    acc[0] = 1
    for c in reversed(f.p.coefficients[:-1]):
        acc = _series_mul(acc, x)
        acc[0] += c
    return acc - f.a * y, x.copy()


def _compose_period(f: HenonMap, C: np.ndarray, N: int) -> np.ndarray:
    x, y = C[:, 0].copy(), C[:, 1].copy()
    for _ in range(N):
        x, y = _apply_map_series(f, x, y)
    return np.stack([x, y], axis=1)


def conjugacy_residual(chart: StableManifoldChart, zetas) -> float:
    """max ||f^N(psi_loc(zeta)) - psi_loc(lambda_s zeta)|| over samples."""
    f, N, ls = chart.f, chart.period, chart.lambda_s
    worst = 0.0
    for zeta in zetas:
        z, w = chart.local(zeta)
        for _ in range(N):
            z, w = f.forward(z, w)
        z2, w2 = chart.local(ls * zeta)
        worst = max(worst, math.hypot(abs(z - z2), abs(w - w2)))
    return worst


def _validity_samples(rho: float) -> list[complex]:
    return [rho * (i / 10) * np.exp(2j * np.pi * (k + 0.5 * i) / 10)
            for i in range(1, 11) for k in range(10)]


def build_local_series(f: HenonMap, orbit: SaddleOrbit, M: int = 20) -> StableManifoldChart:
    """Linearizing series of the stable leaf through ``orbit.P``.

    Order k solves (Df^N_P - lambda_s^k I) c_k = -r_k with r_k the degree-k
    coefficient of f^N applied to the truncated series of lower orders.
    """
    if not orbit.is_saddle:
        raise ResonanceConditioning("orbit is not a saddle", period=orbit.period)
    N = orbit.period
    A = orbit_jacobian(f, orbit.points).to_array()
    ls = orbit.lambda_s
    C = np.zeros((M + 1, 2), dtype=complex)
    C[0] = orbit.P
    C[1] = orbit.eigvec_s
    for k in range(2, M + 1):
        B = A - ls**k * np.eye(2)
        if np.linalg.cond(B) > MAX_CONDITION:
            raise ResonanceConditioning("ill-conditioned homological equation", order=k)
        r = _compose_period(f, C[: k + 1], N)[k]
        C[k] = np.linalg.solve(B, -r)
    tol = CONJUGACY_TOL * (1 + orbit.P.norm())
    rho = None
    for j in range(0, 41):
        trial = StableManifoldChart(f, orbit, C, 2.0**-j)
        if conjugacy_residual(trial, _validity_samples(2.0**-j)) <= tol:
            rho = 2.0**-j
            break
    if rho is None:
        raise ResonanceConditioning("no validity radius found for the local series")
    return StableManifoldChart(f, orbit, C, rho)


def _error_estimate(chart: StableManifoldChart, m: int, bits: int) -> float:
    # inverse-orbit rounding grows at most like the unstable multiplier per period
    steps = chart.period * m
    return 2.0 ** (-bits) * abs(chart.orbit.lambda_u) ** m * (steps + 1)


def _pull_back(chart: StableManifoldChart, Z, derivative: bool, guard: bool):
    f, N = chart.f, chart.period
    m = chart.depth(Z)
    lm = chart.lambda_s**m
    t = Z * lm
    z, w = chart.local(t)
    dz, dw = chart.local_derivative(t) if derivative else (0, 0)
    dz, dw = dz * lm, dw * lm
    for k in range(N * m):
        if derivative:
            z, w, dz, dw = f.inverse_tangent(z, w, dz, dw)
        else:
            z, w = f.inverse(z, w)
        if guard and not (abs(z) <= ESCAPE_MODULUS and abs(w) <= ESCAPE_MODULUS
                          and abs(dz) <= ESCAPE_MODULUS and abs(dw) <= ESCAPE_MODULUS):
            raise EscapedRange("leaf point left the binary64 range", step=k + 1, depth=m)
    return m, z, w, dz, dw


def eval_global(chart: StableManifoldChart, Z, derivative: bool = False,
                bits: int | None = None, fallback_bits: int | None = None):
    """psi(Z) on the whole leaf.

    binary64 by default; when coordinates overflow the evaluation is redone in
    mpmath (``fallback_bits``, default from the environment or 64) and a
    ``ProjectivePoint`` with mpc coordinates is returned instead of an
    ``AffinePoint``. With ``derivative`` the velocity comes back as well:
    affine ``(dz, dw)`` for affine results, homogeneous ``(dX0, dX1, dX2)`` of
    the same normalized lift for projective ones. Explicit ``bits`` computes in
    mpmath from the start and stays affine.
    """
    if bits is not None:
        with mpmath.workprec(bits):
            m, z, w, dz, dw = _pull_back(chart, mpmath.mpc(Z), derivative, guard=False)
            _check_budget(chart, m, bits)
            out = AffinePoint(z, w)
            return (out, (dz, dw)) if derivative else out
    try:
        m, z, w, dz, dw = _pull_back(chart, complex(Z), derivative, guard=True)
    except EscapedRange:
        fb = fallback_bits or env_bits() or 64
        with mpmath.workprec(fb):
            m, z, w, dz, dw = _pull_back(chart, mpmath.mpc(Z), derivative, guard=False)
            _check_budget(chart, m, fb)
            return _projective(z, w, dz, dw, derivative)
    out = AffinePoint(z, w)
    return (out, (dz, dw)) if derivative else out


def _check_budget(chart: StableManifoldChart, m: int, bits: int):
    est = _error_estimate(chart, m, bits)
    if est > 1e-6:
        raise PrecisionExhausted("leaf evaluation needs more mantissa bits",
                                 depth=m, bits=bits, estimate=est)


def _projective(z, w, dz, dw, derivative):
    s = max((z, w, mpmath.mpc(1)), key=abs)
    point = ProjectivePoint(z / s, w / s, 1 / s)
    if not derivative:
        return point
    # same constant rescaling of the lift keeps the velocity consistent
    return point, (dz / s, dw / s, mpmath.mpc(0))


def eval_global_array(chart: StableManifoldChart, Z: np.ndarray):
    """Vectorized binary64 ``eval_global`` with derivative.

    Returns ``(z, w, dz, dw, ok)``; entries with ``ok == False`` overflowed and
    must be evaluated by the scalar fallback.
    """
    f, N = chart.f, chart.period
    Z = np.asarray(Z, dtype=complex)
    r = np.abs(Z)
    lam = abs(chart.lambda_s)
    with np.errstate(divide="ignore"):
        m = np.where(r <= chart.rho, 0,
                     np.ceil(np.log(np.maximum(r, 1e-300) / chart.rho) / -math.log(lam))).astype(int)
    # make m minimal exactly as in the scalar depth()
    m = np.where((m > 0) & (lam ** (m - 1.0) * r <= chart.rho), m - 1, m)
    m = np.where(lam ** m.astype(float) * r > chart.rho, m + 1, m)
    lm = chart.lambda_s ** m
    t = Z * lm
    z, w = chart.local_array(t)
    dz, dw = chart.local_derivative_array(t)
    dz, dw = dz * lm, dw * lm
    ok = np.ones(Z.shape, dtype=bool)
    remaining = N * m
    with np.errstate(all="ignore"):
        for _ in range(int(remaining.max(initial=0))):
            act = (remaining > 0) & ok
            if not act.any():
                break
            zz, ww, dzz, dww = f.inverse_tangent(z[act], w[act], dz[act], dw[act])
            z[act], w[act], dz[act], dw[act] = zz, ww, dzz, dww
            remaining[act] -= 1
            bad = ~(
                (np.abs(z) <= ESCAPE_MODULUS) & (np.abs(w) <= ESCAPE_MODULUS)
                & (np.abs(dz) <= ESCAPE_MODULUS) & (np.abs(dw) <= ESCAPE_MODULUS)
            )
            ok &= ~bad
    return z, w, dz, dw, ok


@dataclass(frozen=True)
class LeafMembership:
    distances: tuple[float, ...]
    max_distance: float
    decay_ratio: float


def leaf_membership_check(f: HenonMap, x: AffinePoint, orbit: SaddleOrbit, steps: int = 8,
                          burn_in: int = 1, bits: int | None = None) -> LeafMembership:
    """Distances ||f^(N k)(x) - P|| for k <= steps and their per-period decay.

    ``decay_ratio`` is the geometric-mean ratio of successive distances after
    ``burn_in`` (about |lambda_s| for leaf points, > 1 off the leaf).
    """
    N = orbit.period
    P = orbit.P
    use_mp = bits is not None or is_mp(x.z)
    ctx = mpmath.workprec(bits) if bits else mpmath.workprec(mpmath.mp.prec)
    with ctx:
        if use_mp:
            x = AffinePoint(mpmath.mpc(x.z), mpmath.mpc(x.w))
        dists = []
        for k in range(steps + 1):
            dists.append(float(abs(x.z - P.z) ** 2 + abs(x.w - P.w) ** 2) ** 0.5)
            for _ in range(N):
                x = AffinePoint(*f.forward(x.z, x.w))
    tail = dists[burn_in:]
    if tail[0] == 0 or tail[-1] == 0 or len(tail) < 2:
        ratio = 0.0
    else:
        ratio = (tail[-1] / tail[0]) ** (1.0 / (len(tail) - 1))
    return LeafMembership(tuple(dists), max(dists), ratio)
