"""Acceptance criteria for the default instance p(z) = z^2 - 6, a = 0.5.

Each ``criterion_k`` returns a list of ``Check`` records (one per
sub-criterion). Values are deterministic for a given seed; wall-clock runtimes
are reported separately in ``Check.runtime`` and never enter CSV output.
"""

from __future__ import annotations

import cmath
import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .escape import classify_forward, green_plus, ESCAPING
from .fubini_study import TangentSample, chordal_distance, fs_speed
from .gallery import CurveSpec, affine_reparam_check, sup_speed_profile
from .henon import (
    DEFAULT_MAP,
    I_MINUS,
    I_PLUS,
    AffinePoint,
    HenonMap,
    ProjectivePoint,
    eval_forward_proj,
)
from .manifold import build_local_series, eval_global
from .pipeline import HALF_DISC_BOUND, SAMPLING_SLACK, SPEED_TOL, PipelineConfig, run_pipeline
from .saddle import find_periodic

DEFAULT_SEED = 0
SLOPE_TOL = 0.25
R_MIN = 8.0


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    passed: bool | None  # None: skipped
    value: object = None
    threshold: object = None
    runtime: float | None = None

    @property
    def status(self) -> str:
        return "skip" if self.passed is None else ("pass" if self.passed else "FAIL")

    def line(self) -> str:
        extra = f" ({self.runtime:.2f} s)" if self.runtime is not None else ""
        return f"[{self.status}] {self.criterion}. {self.name}: value={_short(self.value)} threshold={_short(self.threshold)}{extra}"


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _runtime_check(criterion: int, elapsed: float, limit: float, label: str = "runtime") -> Check:
    return Check(criterion, f"{label} < {limit:g} s", elapsed < limit, round(elapsed, 3), limit, elapsed)


def _disc_points(rng, radius: float, k: int) -> np.ndarray:
    return radius * np.sqrt(rng.uniform(size=k)) * np.exp(2j * np.pi * rng.uniform(size=k))


def default_orbit(f: HenonMap = DEFAULT_MAP, period: int = 1):
    """The saddle of the given period with the strongest contraction."""
    orbits = [o for o in find_periodic(f, period) if o.is_saddle]
    return min(orbits, key=lambda o: abs(o.lambda_s))


# ---------------------------------------------------------------------------


def criterion_1(seed: int = DEFAULT_SEED, f: HenonMap = DEFAULT_MAP) -> list[Check]:
    def run():
        rng = np.random.default_rng(seed)
        zs, ws = _disc_points(rng, 10, 1000), _disc_points(rng, 10, 1000)
        worst = 0.0
        for z, w in zip(zs, ws):
            x = AffinePoint(complex(z), complex(w))
            y = f.inverse(*f.forward(*x))
            worst = max(worst, math.hypot(abs(y[0] - x.z), abs(y[1] - x.w)) / (1 + x.norm()))
        exact = True
        for z, w in zip(_disc_points(rng, 10, 200), _disc_points(rng, 10, 200)):
            q = ProjectivePoint(complex(z), complex(w), 0)
            if q == I_PLUS:
                continue
            exact &= eval_forward_proj(f, q).coords == I_MINUS.coords
        return worst, exact

    (worst, exact), dt = _timed(run)
    return [
        Check(1, "round trip f^-1(f(x)) relative error", worst <= 1e-12, worst, 1e-12),
        Check(1, "line at infinity maps exactly to [1:0:0]", bool(exact), bool(exact), True),
        _runtime_check(1, dt, 1.0),
    ]


def criterion_2(f: HenonMap = DEFAULT_MAP) -> list[Check]:
    def run():
        return find_periodic(f, 1)

    orbits, dt = _timed(run)
    # fixed points satisfy z = w and z^2 - (1 + a) z + c = 0 for p = z^2 + c
    c = f.p.coefficients[0]
    disc = cmath.sqrt((1 + f.a) ** 2 - 4 * c)
    roots = [((1 + f.a) + disc) / 2, ((1 + f.a) - disc) / 2]
    err = max(min(abs(o.P.z - r) + abs(o.P.w - r) for o in orbits) for r in roots) if len(orbits) == 2 else math.inf
    prod = max(abs(o.lambda_s * o.lambda_u - f.a) / abs(f.a) for o in orbits)
    z1 = min(orbits, key=lambda o: abs(o.lambda_s))
    checks = [
        Check(2, "two fixed points found", len(orbits) == 2, len(orbits), 2),
        Check(2, "fixed points match quadratic formula", err <= 1e-10, err, 1e-10),
        Check(2, "lambda_s * lambda_u = a (relative)", prod <= 1e-8, prod, 1e-8),
        Check(2, "|lambda_s| = 0.07637", abs(abs(z1.lambda_s) - 0.07637) <= 1e-4, abs(z1.lambda_s), 0.07637),
        Check(2, "|lambda_u| = 6.5471", abs(abs(z1.lambda_u) - 6.5471) <= 1e-4, abs(z1.lambda_u), 6.5471),
        _runtime_check(2, dt, 1.0),
    ]
    return checks


def criterion_3(seed: int = DEFAULT_SEED, f: HenonMap = DEFAULT_MAP) -> list[Check]:
    def run():
        orbit = default_orbit(f)
        chart = build_local_series(f, orbit, 20)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(100):
            zeta = 10 ** rng.uniform(-3, 3) * np.exp(2j * np.pi * rng.uniform())
            x = eval_global(chart, complex(zeta))
            fx = x
            for _ in range(orbit.period):
                fx = AffinePoint(*f.forward(*fx))
            y = eval_global(chart, complex(orbit.lambda_s * zeta))
            worst = max(worst, math.hypot(abs(fx.z - y.z), abs(fx.w - y.w)) / (1 + x.norm()))
        return worst

    worst, dt = _timed(run)
    return [
        Check(3, "conjugacy f^N(psi(Z)) = psi(lambda_s Z), |Z| <= 1e3", worst <= 1e-8, worst, 1e-8),
        _runtime_check(3, dt, 10.0),
    ]


def criterion_4(seed: int = DEFAULT_SEED, f: HenonMap = DEFAULT_MAP) -> list[Check]:
    def run():
        rng = np.random.default_rng(seed)
        worst, used = 0.0, 0
        while used < 100:
            x = AffinePoint(complex(_disc_points(rng, 6, 1)[0]), complex(_disc_points(rng, 6, 1)[0]))
            if classify_forward(f, x).classification != ESCAPING:
                continue
            g = green_plus(f, x)
            gf = green_plus(f, AffinePoint(*f.forward(*x)))
            worst = max(worst, abs(gf - f.d * g))
            used += 1
        periodic = 0.0
        count = 0
        for N in (1, 2, 3, 4):
            for o in find_periodic(f, N):
                for pt in o.points:
                    periodic = max(periodic, green_plus(f, pt))
                    count += 1
        return worst, periodic, count

    (worst, periodic, count), dt = _timed(run)
    return [
        Check(4, "|g+(f(x)) - d g+(x)| on 100 escaping samples", worst <= 1e-5, worst, 1e-5),
        Check(4, f"g+ = 0 at all {count} periodic points of period <= 4", periodic == 0.0, periodic, 0.0),
        _runtime_check(4, dt, 5.0),
    ]


def _pipeline_checks(result, label: str) -> list[Check]:
    its = [it for it in result.iterates if it.R_n >= R_MIN]
    s0 = max((abs(it.speed_at_0 - 1) for it in its), default=math.nan)
    half = max((it.max_speed_half_disc for it in its), default=math.nan)
    chain = max((it.chain_error for it in its), default=math.nan)
    gap_ok = all(it.injectivity_min_gap > 0 for it in its)
    log2_gap = min((it.injectivity_log2_gap for it in its), default=math.nan)
    green = max((it.green_max for it in its), default=math.nan)
    slope_err = abs(result.slope - result.expected_slope) / result.expected_slope
    bound = HALF_DISC_BOUND + SAMPLING_SLACK
    return [
        Check(5, f"{label}: iterates with R_n >= 8", len(its) >= 1, len(its), 1),
        Check(5, f"{label}: |speed_at_0 - 1|", s0 <= SPEED_TOL, s0, SPEED_TOL),
        Check(5, f"{label}: max speed on half disc", half <= bound, half, bound),
        Check(5, f"{label}: Moebius height chain (relative)", chain <= 1e-9, chain, 1e-9),
        Check(5, f"{label}: R_n nondecreasing after burn-in", result.monotone_after_burn_in,
              result.monotone_after_burn_in, True),
        Check(5, f"{label}: log R_n slope vs -log|lambda_s| (relative)", slope_err <= SLOPE_TOL,
              slope_err, SLOPE_TOL),
        Check(5, f"{label}: injectivity gap > 0 (min log2 gap)", gap_ok, log2_gap, "> -inf"),
        Check(5, f"{label}: max g+ on sampled images", green <= 1e-6, green, 1e-6),
    ]


def criterion_5(seed: int = DEFAULT_SEED, f: HenonMap = DEFAULT_MAP, quick: bool = False,
                n_max: int = 25) -> list[Check]:
    orbit = default_orbit(f)
    chart = build_local_series(f, orbit, 20)
    cfg = PipelineConfig(mode="binary64", seed=seed)
    res64, dt64 = _timed(lambda: run_pipeline(chart, n_max, config=cfg))
    checks = _pipeline_checks(res64, "binary64")
    checks.append(Check(5, "binary64: last good n", True, res64.last_good_n, None))
    checks.append(_runtime_check(5, dt64, 300.0, "binary64 runtime"))
    if quick:
        checks.append(Check(5, "ladder to n_max = 25", None, "skipped (quick)", n_max))
        return checks
    resl, dtl = _timed(lambda: run_pipeline(chart, n_max, config=replace(cfg, mode="ladder")))
    checks += _pipeline_checks(resl, "ladder")
    checks.append(Check(5, f"ladder reaches n_max = {n_max}", resl.last_good_n >= n_max,
                        resl.last_good_n, n_max))
    checks.append(_runtime_check(5, dtl, 1800.0, "ladder runtime"))
    return checks


def criterion_6() -> list[Check]:
    def run():
        out = []
        bounded = [CurveSpec("poly-graph", p=(0, 0, 1)), CurveSpec("poly-graph", p=(1, -2, 0, 1)),
                   CurveSpec("exp-pair", p=(1,), q=(1,), alpha=-1),
                   CurveSpec("exp-pair", p=(1, 1), q=(2, 0, 1), alpha=2j)]
        for spec in bounded:
            prof = sup_speed_profile(spec)
            at20 = dict(prof)[20.0]
            rise = max(s for r, s in prof if r >= 20) / at20 - 1
            out.append(Check(6, f"{spec.describe()}: rise past radius 20", rise <= 0.01,
                             rise, 0.01))
        for spec in (CurveSpec("exp-quadratic"), CurveSpec("graph-exp-power", n=3)):
            prof = dict(sup_speed_profile(spec))
            out.append(Check(6, f"{spec.label}: profile at radius 30 exceeds 1e3", prof[30.0] >= 1e3,
                             prof[30.0], 1e3))
        err = max(affine_reparam_check(CurveSpec("poly-graph"), 2, 1 + 1j),
                  affine_reparam_check(CurveSpec("exp-pair", p=(1, 1), q=(2, 0, 1), alpha=2j), 0.5j, -1),
                  affine_reparam_check(CurveSpec("graph-exp-power", n=3), 1 - 1j, 0.25))
        out.append(Check(6, "affine reparametrization check", err <= 1e-10, err, 1e-10))
        return out

    checks, dt = _timed(run)
    return checks + [_runtime_check(6, dt, 60.0)]


def criterion_7(seed: int = DEFAULT_SEED) -> list[Check]:
    def run():
        rng = np.random.default_rng(seed)
        h = 1e-6
        fd = 0.0
        for _ in range(100):
            x = _disc_points(rng, 10, 2)
            v = _disc_points(rng, 3, 2)
            s = fs_speed(TangentSample.from_affine(AffinePoint(*x), v))
            p0 = ProjectivePoint(x[0], x[1], 1)
            p1 = ProjectivePoint(x[0] + h * v[0], x[1] + h * v[1], 1)
            fd = max(fd, abs(chordal_distance(p0, p1) / h - s) / s)
        overlap = 0.0
        for _ in range(100):
            X = tuple(complex(c) for c in _disc_points(rng, 10, 3))
            dX = tuple(complex(c) for c in _disc_points(rng, 3, 3))
            speeds = [fs_speed(TangentSample.from_lift(X, dX, chart=k)) for k in range(3)]
            overlap = max(overlap, (max(speeds) - min(speeds)) / max(speeds))
        return fd, overlap

    (fd, overlap), dt = _timed(run)
    return [
        Check(7, "finite-difference agreement (relative)", fd <= 1e-5, fd, 1e-5),
        Check(7, "chart-overlap agreement (relative)", overlap <= 1e-10, overlap, 1e-10),
        _runtime_check(7, dt, 1.0),
    ]


def criterion_8(seed: int = DEFAULT_SEED) -> list[Check]:
    """Two quick selftest runs in fresh processes must emit identical CSVs."""

    def run():
        digests = []
        with tempfile.TemporaryDirectory() as tmp:
            for k in range(2):
                out = Path(tmp) / f"run{k}"
                cmd = [sys.executable, "-m", "henon_brody.cli", "selftest", "--quick", "--skip", "8",
                       "--seed", str(seed), "--out", str(out)]
                subprocess.run(cmd, check=False, capture_output=True, env=dict(os.environ))
                files = sorted(out.glob("*.csv"))
                digests.append({p.name: p.read_bytes() for p in files})
        return digests

    (a, b), dt = _timed(run)
    same = bool(a) and a == b
    return [Check(8, "selftest CSVs byte-identical across runs", same, len(a), "identical"),
            Check(8, "runtime (informational)", None, round(dt, 3), None, dt)]


CRITERIA = {
    1: lambda seed, quick: criterion_1(seed),
    2: lambda seed, quick: criterion_2(),
    3: lambda seed, quick: criterion_3(seed),
    4: lambda seed, quick: criterion_4(seed),
    5: lambda seed, quick: criterion_5(seed, quick=quick),
    6: lambda seed, quick: criterion_6(),
    7: lambda seed, quick: criterion_7(seed),
    8: lambda seed, quick: criterion_8(seed),
}


def run_all(seed: int = DEFAULT_SEED, quick: bool = False, skip=(), stream=None) -> list[Check]:
    checks = []
    for k, fn in CRITERIA.items():
        if k in skip:
            continue
        for c in fn(seed, quick):
            checks.append(c)
            if stream is not None:
                print(c.line(), file=stream, flush=True)
    return checks
