"""Brody reparametrization of pulled-back leaf discs.

phi_n = f^(-N n) o psi restricted to the unit disc is evaluated through the
linearization as psi(lambda_s^(-n) theta). For each n the height
H_n(theta) = |phi_n|_FS(theta) (1 - |theta|^2) is maximized at theta_n, the
disc is recentred by mu_n(zeta) = (zeta + theta_n) / (1 + conj(theta_n) zeta),
g_n = phi_n o mu_n, R_n = |g_n|_FS(0) and k_n(theta) = g_n(theta / R_n).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import extended as ext
from .errors import DegenerateRescale, EscapedRange, PipelineFailed, PrecisionExhausted
from .escape import green_plus
from .fubini_study import TangentSample, compass_maximize, fs_speed_affine_array, fs_speed_lift
from .henon import AffinePoint
from .manifold import StableManifoldChart, eval_global, eval_global_array, leaf_membership_check
from .precision import ladder_bits

log = logging.getLogger(__name__)

MODES = ("binary64", "ladder")
SPEED_TOL = 1e-9
HALF_DISC_BOUND = 2.0
SAMPLING_SLACK = 0.05
LITERAL_PULLBACK_MAX_N = 5


@dataclass(frozen=True)
class PipelineConfig:
    grid: int = 48
    half_disc_grid: int = 32
    injectivity_samples: int = 1000
    chain_samples: int = 50
    confinement_samples: int = 12
    mode: str = "ladder"
    bits: int | None = None  # fixed mantissa for every n instead of the ladder
    green_bits_budget: int = 1 << 16
    burn_in: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.grid < 32:
            raise ValueError("grid must be >= 32")
        if self.injectivity_samples < 100:
            raise ValueError("injectivity_samples must be >= 100")


@dataclass(frozen=True)
class ReparamIterate:
    n: int
    theta_n: complex
    H_max: float
    R_n: float
    max_speed_half_disc: float
    speed_at_0: float
    injectivity_min_gap: float | mpmath.mpf
    injectivity_log2_gap: float = math.nan
    phi_speed_0: float = math.nan
    chain_error: float = math.nan
    green_max: float = math.nan
    leaf_decay: float = math.nan
    pullback_error: float | None = None
    bits: int | None = None


@dataclass(frozen=True)
class PipelineResult:
    iterates: tuple[ReparamIterate, ...]
    n_max: int
    last_good_n: int
    stop_reason: str | None
    slope: float
    expected_slope: float
    monotone_after_burn_in: bool
    errors: tuple[dict, ...] = field(default=())


# ---------------------------------------------------------------------------
# leaf evaluation with speeds and projective positions


@dataclass
class LeafJets:
    speed: np.ndarray
    points: ext.Ext | None = None  # pivot-normalized homogeneous coords, shape (k, 3)


def _mp_point(chart: StableManifoldChart, Z, dscale, bits: int):
    with mpmath.workprec(bits):
        x, (dz, dw) = eval_global(chart, Z, derivative=True, bits=bits)
        X = (x.z, x.w, mpmath.mpc(1))
        dX = (dz * dscale, dw * dscale, mpmath.mpc(0))
        speed = fs_speed_lift(X, dX)
        piv = max(X, key=abs)
        coords = [c / piv for c in X]
    return speed, coords


def evaluate_leaf(chart: StableManifoldChart, Z, dscale, mode: str = "ladder",
                  bits: int | None = None, want_points: bool = False, n: int | None = None) -> LeafJets:
    """FS speeds of theta -> psi(Z(theta)) where dZ/dtheta = ``dscale``.

    binary64 throughout in ``mode='binary64'`` (overflow raises
    ``PrecisionExhausted``); in ``'ladder'`` mode overflowing samples are
    redone in mpmath at ``bits``.
    """
    Z = np.atleast_1d(np.asarray(Z, dtype=complex))
    dscale = np.broadcast_to(np.asarray(dscale, dtype=complex), Z.shape)
    z, w, dz, dw, ok = eval_global_array(chart, Z)
    speed = np.empty(Z.shape)
    with np.errstate(all="ignore"):
        speed[ok] = fs_speed_affine_array(z[ok], w[ok], dz[ok] * dscale[ok], dw[ok] * dscale[ok])
    bad = np.flatnonzero(~ok)
    if len(bad) and mode == "binary64":
        raise PrecisionExhausted("leaf samples left the binary64 range", n=n, samples=int(len(bad)))
    mp_coords = {}
    for i in bad:
        speed[i], mp_coords[i] = _mp_point(chart, complex(Z[i]), complex(dscale[i]), bits or 64)
    points = None
    if want_points:
        with np.errstate(all="ignore"):
            points = projective_ext(np.where(ok, z, 0), np.where(ok, w, 0))
        for i, c in mp_coords.items():
            ce = ext.from_mpc(c)
            points.mant[i], points.exp[i] = ce.mant, ce.exp
    return LeafJets(speed, points)


def projective_ext(z, w) -> ext.Ext:
    """Pivot-normalized homogeneous coordinates of affine points, shape (k, 3)."""
    z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
    piv = np.where(np.abs(z) >= np.maximum(np.abs(w), 1.0), z,
                   np.where(np.abs(w) >= 1.0, w, 1.0 + 0j))
    coords = np.stack([z / piv, w / piv, 1.0 / piv], axis=1)
    e = ext.from_complex(coords.ravel())
    return ext.Ext(e.mant.reshape(coords.shape), e.exp.reshape(coords.shape))


# ---------------------------------------------------------------------------
# curve families


def mobius(theta_n: complex, zeta):
    return (zeta + theta_n) / (1 + np.conj(theta_n) * zeta)


def mobius_derivative(theta_n: complex, zeta):
    return (1 - abs(theta_n) ** 2) / (1 + np.conj(theta_n) * zeta) ** 2


@dataclass(frozen=True)
class PhiN:
    """phi_n(theta) = psi(lambda_s^(-n) theta) on the unit disc."""

    chart: StableManifoldChart
    n: int
    mode: str = "ladder"
    bits: int | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")

    @property
    def scale(self) -> complex:
        return complex(self.chart.lambda_s) ** (-self.n)

    @property
    def working_bits(self) -> int:
        if self.bits is not None:
            return self.bits
        o = self.chart.orbit
        return ladder_bits(self.n, o.period, abs(o.lambda_u))

    def speeds(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=complex)
        return evaluate_leaf(self.chart, thetas * self.scale, self.scale, self.mode,
                             self.working_bits, n=self.n).speed.reshape(thetas.shape)

    def __call__(self, theta: complex) -> TangentSample:
        Z = complex(theta) * self.scale
        try:
            x, (dz, dw) = eval_global(self.chart, Z, derivative=True)
        except EscapedRange:
            x = None
        if x is not None and not hasattr(x, "coords"):
            return TangentSample.from_affine(x, (dz * self.scale, dw * self.scale))
        with mpmath.workprec(self.working_bits):
            x, (dz, dw) = eval_global(self.chart, Z, derivative=True, bits=self.working_bits)
            X = (x.z, x.w, mpmath.mpc(1))
            dX = (dz * self.scale, dw * self.scale, mpmath.mpc(0))
            return TangentSample.from_lift(X, dX)

    def heights(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=complex)
        return self.speeds(thetas) * (1 - np.abs(thetas) ** 2)


@dataclass(frozen=True)
class Recentred:
    """g_n(zeta) = phi_n(mu_n(zeta)) and k_n(theta) = g_n(theta / R)."""

    phi: PhiN
    theta_n: complex
    R: float = 1.0

    def arguments(self, thetas):
        zeta = np.asarray(thetas, dtype=complex) / self.R
        Z = mobius(self.theta_n, zeta) * self.phi.scale
        dscale = mobius_derivative(self.theta_n, zeta) * self.phi.scale / self.R
        return Z, dscale

    def jets(self, thetas, want_points: bool = False) -> LeafJets:
        Z, dscale = self.arguments(thetas)
        return evaluate_leaf(self.phi.chart, Z, dscale, self.phi.mode, self.phi.working_bits,
                             want_points=want_points, n=self.phi.n)

    def speeds(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=complex)
        return self.jets(thetas.ravel()).speed.reshape(thetas.shape)


# ---------------------------------------------------------------------------
# one reparametrization step


def height_grid(n: int, lambda_s: complex, grid: int) -> np.ndarray:
    """Polar sample of the unit disc for H_n.

    Radii are log-spaced down to 1e-3 |lambda_s|^n, where the maximizer lives,
    plus Chebyshev-type radii clustered at the boundary.
    """
    r_min = 1e-3 * abs(lambda_s) ** n
    r_max = 1 - 1e-6
    logr = np.exp(np.linspace(math.log(r_min), math.log(r_max), grid))
    k = np.arange(grid // 4)
    cheb = r_max * np.cos(np.pi * (k + 0.5) / (2 * len(k)))
    radii = np.unique(np.concatenate([logr, cheb]))
    ang = 2 * np.pi * np.arange(grid) / grid
    pts = (radii[:, None] * np.exp(1j * ang[None, :])).ravel()
    return np.concatenate([[0j], pts])


def _tie_key(value: float, theta: complex):
    return (-value, abs(theta), math.atan2(theta.imag, theta.real) % (2 * math.pi))


def maximize_height(phi: PhiN, grid: int, starts: int = 4, min_step: float = 1e-9):
    """(H_max, theta_n) over the disc of radius 1 - 1e-6.

    Compass refinement runs in u = log(theta), so the search is scale-free
    however small theta_n is.
    """
    thetas = height_grid(phi.n, phi.chart.lambda_s, grid)
    H = phi.heights(thetas)
    order = sorted(range(len(thetas)), key=lambda i: _tie_key(H[i], complex(thetas[i])))
    best = (float(H[order[0]]), complex(thetas[order[0]]))
    log_rmax = math.log(1 - 1e-6)
    fun = lambda u: float(phi.heights(np.array([np.exp(u)]))[0])
    inside = lambda u: u.real <= log_rmax
    step = max(2 * math.pi / grid, (log_rmax - math.log(1e-3 * abs(phi.chart.lambda_s) ** phi.n)) / grid)
    for i in order[:starts]:
        t = complex(thetas[i])
        if t == 0:
            continue
        val, u = compass_maximize(fun, complex(math.log(abs(t)), math.atan2(t.imag, t.real)),
                                  float(H[i]), step, min_step, inside)
        loc = complex(np.exp(u))
        if _tie_key(val, loc) < _tie_key(*best):
            best = (val, loc)
    return best


def _area_uniform(rng: np.random.Generator, radius: float, k: int) -> np.ndarray:
    r = radius * np.sqrt(rng.uniform(size=k))
    return r * np.exp(2j * np.pi * rng.uniform(size=k))


def injectivity_gap(points: ext.Ext, thetas: np.ndarray, chunk: int = 200_000):
    """min over pairs of chordal(k(theta), k(theta')) / |theta - theta'|.

    ``points`` are pivot-normalized homogeneous coordinates in extended
    exponent form. Returns ``(gap, log2_gap)``; ``gap`` is an mpf when it
    underflows binary64.
    """
    thetas = np.asarray(thetas, dtype=complex)
    m = len(thetas)
    if m < 2:
        raise ValueError("need at least two samples")
    I, J = np.triu_indices(m, k=1)
    best_log2 = math.inf
    best = (0.0, 0)
    for s in range(0, len(I), chunk):
        i, j = I[s : s + chunk], J[s : s + chunk]
        wedge = None
        for a, b in ((0, 1), (0, 2), (1, 2)):
            t = ext.sub(ext.mul(points[i, a], points[j, b]), ext.mul(points[i, b], points[j, a]))
            t2 = ext.abs2(t)
            wedge = t2 if wedge is None else ext.add(wedge, t2)
        chord = ext.sqrt(wedge)
        denom = np.abs(thetas[i] - thetas[j]) * np.sqrt(_norm2(points, i) * _norm2(points, j))
        ratio = ext.scale(chord, 1.0 / denom)
        lg = ext.log2(ratio)
        k = int(np.argmin(lg))
        if lg[k] < best_log2:
            best_log2 = float(lg[k])
            best = (float(ratio.mant[k]), int(ratio.exp[k]))
    return ext.to_number(*best), best_log2


def _norm2(points: ext.Ext, idx) -> np.ndarray:
    # pivot coordinate is 1, others have modulus <= 1: plain binary64 suffices
    m = points.mant[idx]
    e = np.clip(points.exp[idx], -1100, 2)
    return np.sum(np.abs(np.ldexp(m.real, e)) ** 2 + np.abs(np.ldexp(m.imag, e)) ** 2, axis=1)


def confinement_check(chart: StableManifoldChart, Zs, budget: int, n: int | None = None):
    """(max g+, worst leaf decay ratio) over leaf points psi(Z).

    Forward orbits of far leaf points cancel about 2 log2 ||x|| bits, so each
    sample is evaluated and iterated at a precision sized from a cheap 64-bit
    pass; beyond ``budget`` bits ``PrecisionExhausted`` is raised.
    """
    f, orbit = chart.f, chart.orbit
    lam_u = abs(orbit.lambda_u)
    g_max, decay = 0.0, 0.0
    for Z in Zs:
        m = chart.depth(Z)
        with mpmath.workprec(64):
            L = float(mpmath.log(eval_global(chart, Z, bits=64).norm() + 1, 2))
        bits = int(64 + 2 * L + math.ceil(m * math.log2(lam_u)) + 32)
        if bits > budget:
            raise PrecisionExhausted("confinement check needs more bits than the budget",
                                     n=n, bits=bits, budget=budget)
        with mpmath.workprec(bits):
            x = eval_global(chart, Z, bits=bits)
            g_max = max(g_max, green_plus(f, x))
            leaf = leaf_membership_check(f, x, orbit, steps=m + 6, burn_in=m + 1, bits=bits)
        decay = max(decay, leaf.decay_ratio)
    return g_max, decay


def literal_pullback_error(chart: StableManifoldChart, n: int, samples: int, seed: int = 0) -> float:
    """max ||phi_n(theta) - f^(-N n)(psi(theta))|| / (1 + ||.||) on the disc."""
    rng = np.random.default_rng(seed)
    scale = complex(chart.lambda_s) ** (-n)
    worst = 0.0
    for theta in _area_uniform(rng, 0.9, samples):
        z, w = literal_phi_sample(chart, n, complex(theta))
        y = eval_global(chart, complex(theta) * scale)
        if hasattr(y, "coords"):
            continue
        err = math.hypot(abs(z - y.z), abs(w - y.w)) / (1 + y.norm())
        worst = max(worst, err)
    return worst


def reparam_step(chart: StableManifoldChart, n: int, grid: int = 48,
                 config: PipelineConfig | None = None) -> ReparamIterate:
    cfg = config or PipelineConfig(grid=grid)
    if grid < 32:
        raise ValueError("grid must be >= 32")
    phi = PhiN(chart, n, cfg.mode, cfg.bits)
    H_max, theta_n = maximize_height(phi, grid)
    g = Recentred(phi, theta_n)
    R_n = float(g.speeds(np.array([0j]))[0])
    if not R_n > 0:
        raise DegenerateRescale("g_n has zero speed at 0", n=n)
    k = Recentred(phi, theta_n, R_n)
    speed_at_0 = float(k.speeds(np.array([0j]))[0])
    phi_speed_0 = float(phi.speeds(np.array([0j]))[0])

    G = cfg.half_disc_grid
    r = (R_n / 2) * np.arange(G + 1) / G
    ang = 2 * np.pi * np.arange(G) / G
    half = np.concatenate([[0j], (r[1:, None] * np.exp(1j * ang[None, :])).ravel()])
    max_half = float(np.max(k.speeds(half)))

    rng = np.random.default_rng(cfg.seed + 7919 * n)
    zeta = _area_uniform(rng, 0.9, cfg.chain_samples)
    lhs = g.speeds(zeta) * (1 - np.abs(zeta) ** 2)
    rhs = phi.heights(mobius(theta_n, zeta))
    chain_error = float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)))

    thetas = _area_uniform(rng, R_n / 2, cfg.injectivity_samples)
    jets = k.jets(thetas, want_points=True)
    gap, log2_gap = injectivity_gap(jets.points, thetas)

    K = cfg.confinement_samples
    conf = np.concatenate([(R_n / 2) * np.exp(2j * np.pi * np.arange(K - K // 3) / (K - K // 3)),
                           _area_uniform(rng, R_n / 2, K // 3)])
    Zs, _ = k.arguments(conf)
    green_max, decay = confinement_check(chart, [complex(z) for z in Zs], cfg.green_bits_budget, n)

    pullback = None
    if n <= LITERAL_PULLBACK_MAX_N:
        pullback = literal_pullback_error(chart, n, 50, cfg.seed)
    return ReparamIterate(
        n=n, theta_n=theta_n, H_max=H_max, R_n=R_n, max_speed_half_disc=max_half,
        speed_at_0=speed_at_0, injectivity_min_gap=gap, injectivity_log2_gap=log2_gap,
        phi_speed_0=phi_speed_0, chain_error=chain_error, green_max=green_max,
        leaf_decay=decay, pullback_error=pullback,
        bits=None if cfg.mode == "binary64" else phi.working_bits,
    )


def run_pipeline(chart: StableManifoldChart, n_max: int, grid: int = 48,
                 config: PipelineConfig | None = None, progress=None) -> PipelineResult:
    """Iterates n = 1..n_max, stopping at the first precision exhaustion."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    cfg = config or PipelineConfig(grid=grid)
    iterates: list[ReparamIterate] = []
    stop, errors = None, []
    for n in range(1, n_max + 1):
        try:
            it = reparam_step(chart, n, grid, cfg)
        except PrecisionExhausted as exc:
            stop = f"precision-exhausted at n={n}"
            errors.append(exc.record())
            log.info("pipeline stopped: %s", exc)
            break
        iterates.append(it)
        if progress is not None:
            progress(it)
    if len(iterates) < 3:
        raise PipelineFailed("fewer than 3 successful iterates", iterates=len(iterates),
                             reason=stop)
    ns = np.array([it.n for it in iterates], dtype=float)
    logR = np.log([it.R_n for it in iterates])
    slope = float(np.polyfit(ns, logR, 1)[0])
    tail = [it.R_n for it in iterates if it.n >= cfg.burn_in]
    monotone = all(b >= a for a, b in zip(tail, tail[1:]))
    return PipelineResult(tuple(iterates), n_max, iterates[-1].n, stop, slope,
                          -math.log(abs(chart.lambda_s)), monotone, tuple(errors))


def literal_phi_sample(chart: StableManifoldChart, n: int, theta: complex) -> AffinePoint:
    """f^(-N n)(psi(theta)) by explicit inverse periods (binary64)."""
    x = eval_global(chart, theta)
    z, w = x
    for _ in range(chart.period * n):
        z, w = chart.f.inverse(z, w)
    return AffinePoint(z, w)
