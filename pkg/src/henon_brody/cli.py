"""Command-line front end.

    henon-brody classify --grid 200 --half-width 4
    henon-brody periodic --period 1
    henon-brody reparam --n-max 12 --mode ladder
    henon-brody selftest

Exit codes: 0 success, 1 usage error, 2 domain error. Errors are written to
stderr as one JSON record per line; every emitted file is declared on stdout
with its sha256.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance, escape, gallery, manifold, pipeline, saddle
from .errors import HenonError, UsageError
from .fubini_study import fs_speed_affine_array, fs_speed_lift
from .henon import AffinePoint, HenonMap
from .mapspec import MapSpecError, parse_complex, parse_map
from .output import Emitter
from .precision import PRECISION_ENV, env_bits

log = logging.getLogger("henon_brody")

COMMANDS = ("classify", "green", "periodic", "manifold", "reparam", "gallery", "selftest")
DEFAULT_MAP_TEXT = "p = z^2 - 6; a = 0.5"


@dataclass
class RunConfig:
    command: str
    map: str = DEFAULT_MAP_TEXT
    out: str = "out"
    seed: int = 0
    bits: int | None = None
    # classify / green
    base: str = "0,0"
    direction: str = "1,1"
    center: str = "0"
    half_width: float = 5.0
    half_height: float = 5.0
    grid: int = 200
    n_max: int = 200
    tol: float = 1e-9
    # periodic / manifold
    period: int = 1
    orbit: int | None = None
    series_order: int = 20
    rays: int = 8
    ray_max: float = 1e3
    samples: int = 64
    # reparam
    reparam_n_max: int = 12
    reparam_grid: int = 48
    mode: str = "ladder"
    injectivity_samples: int = 1000
    green_bits_budget: int = 1 << 16
    force: bool = False
    profiles: bool = False
    # gallery
    radii: str = ",".join(str(r) for r in gallery.DEFAULT_RADII)
    angles: int = gallery.DEFAULT_ANGLES
    # selftest
    quick: bool = False
    skip: list[int] = field(default_factory=list)

    hmap: HenonMap | None = field(default=None, repr=False)

    def validate(self) -> None:
        bad = []
        for name in ("half_width", "half_height", "tol", "ray_max"):
            if not getattr(self, name) > 0:
                bad.append(f"{name} must be positive")
        for name in ("grid", "n_max", "period", "series_order", "rays", "samples", "angles"):
            if getattr(self, name) < 1:
                bad.append(f"{name} must be >= 1")
        if self.command == "reparam":
            if self.reparam_n_max < 1:
                bad.append("n_max must be >= 1 for reparam")
            if self.reparam_grid < 32:
                bad.append("grid must be >= 32 for reparam")
            if self.injectivity_samples < 100:
                bad.append("injectivity_samples must be >= 100")
        if self.mode not in pipeline.MODES:
            bad.append(f"mode must be one of {pipeline.MODES}")
        if self.bits is not None and self.bits < 53:
            bad.append("bits must be >= 53")
        if bad:
            raise UsageError("invalid configuration", fields=bad)
        try:
            self.hmap = parse_map(self.map)
        except MapSpecError as exc:
            raise UsageError(str(exc), fields=["map"]) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _pair(text: str) -> tuple[complex, complex]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated complex numbers, got {text!r}")
    try:
        return parse_complex(parts[0]), parse_complex(parts[1])
    except MapSpecError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = _Parser(add_help=False)
    common.add_argument("--map", default=S, help=f'map text, default "{DEFAULT_MAP_TEXT}"')
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--out", default=S, help="output directory")
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--bits", type=int, default=S, help=f"mantissa bits (overrides {PRECISION_ENV})")
    common.add_argument("-v", "--verbose", action="store_true")

    window = _Parser(add_help=False)
    window.add_argument("--base", default=S, help="base point z,w of the complex line")
    window.add_argument("--direction", default=S, help="direction z,w of the complex line")
    window.add_argument("--center", default=S, help="center of the parameter window")
    window.add_argument("--half-width", type=float, default=S)
    window.add_argument("--half-height", type=float, default=S)
    window.add_argument("--grid", type=int, default=S)
    window.add_argument("--n-max", type=int, default=S)

    parser = _Parser(prog="henon-brody", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("classify", parents=[common, window], help="escape classification image")
    g = sub.add_parser("green", parents=[common, window], help="Green function on a section")
    g.add_argument("--tol", type=float, default=S)
    p = sub.add_parser("periodic", parents=[common], help="periodic orbits of a given period")
    p.add_argument("--period", type=int, default=S)
    m = sub.add_parser("manifold", parents=[common], help="stable-manifold samples")
    m.add_argument("--period", type=int, default=S)
    m.add_argument("--orbit", type=int, default=S, help="orbit index (default: strongest contraction)")
    m.add_argument("--series-order", type=int, default=S)
    m.add_argument("--rays", type=int, default=S)
    m.add_argument("--ray-max", type=float, default=S)
    m.add_argument("--samples", type=int, default=S)
    r = sub.add_parser("reparam", parents=[common], help="Brody reparametrization pipeline")
    r.add_argument("--period", type=int, default=S)
    r.add_argument("--orbit", type=int, default=S)
    r.add_argument("--series-order", type=int, default=S)
    r.add_argument("--n-max", dest="reparam_n_max", type=int, default=S)
    r.add_argument("--grid", dest="reparam_grid", type=int, default=S)
    r.add_argument("--mode", choices=pipeline.MODES, default=S)
    r.add_argument("--injectivity-samples", type=int, default=S)
    r.add_argument("--green-bits-budget", type=int, default=S)
    r.add_argument("--force", action="store_true", default=S, help="run even when |a| > 1")
    r.add_argument("--profiles", action="store_true", default=S, help="per-n speed profile CSVs")
    gal = sub.add_parser("gallery", parents=[common], help="speed profiles of example curves")
    gal.add_argument("--radii", default=S)
    gal.add_argument("--angles", type=int, default=S)
    st = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    st.add_argument("--quick", action="store_true", default=S, help="skip the precision-ladder run")
    st.add_argument("--skip", type=int, action="append", default=S, help="criterion to skip")
    return parser


def parse_config(argv: list[str] | None = None) -> tuple[RunConfig, bool]:
    ns = build_parser().parse_args(argv)
    if ns.command is None:
        raise UsageError("a subcommand is required", choices=list(COMMANDS))
    values: dict = {}
    if ns.config:
        try:
            values = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        known = {f.name for f in dataclasses.fields(RunConfig)} - {"command", "hmap"}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError("unknown config fields", fields=unknown)
    flags = {k: v for k, v in vars(ns).items() if k not in ("config", "verbose", "command")}
    values.update(flags)
    cfg = RunConfig(command=ns.command, **values)
    cfg.validate()
    return cfg, ns.verbose


# ---------------------------------------------------------------------------


def _section(cfg: RunConfig) -> escape.Section:
    try:
        center = parse_complex(cfg.center)
    except MapSpecError as exc:
        raise UsageError(str(exc), fields=["center"]) from None
    return escape.Section(AffinePoint(*_pair(cfg.base)), AffinePoint(*_pair(cfg.direction)),
                          center, cfg.half_width, cfg.half_height)


def _classify(cfg: RunConfig, em: Emitter) -> None:
    f = cfg.hmap
    sec = _section(cfg)
    s = sec.parameters((cfg.grid, cfg.grid))
    z, w = sec.points(s)
    R = escape.filtration_radius(f).R
    codes, n_esc = escape.classify_grid(f, z, w, cfg.n_max, R=R)
    boundary = escape.boundary_mask(codes)
    img = np.where(codes == escape.CLASS_CODES[escape.ESCAPING], 255,
                   np.where(codes == escape.CLASS_CODES[escape.BOUNDED], 0, 128)).astype(np.uint8)
    img[boundary] = 64
    em.pgm("classify.pgm", img)
    rows = ((q.real, q.imag, a.real, a.imag, b.real, b.imag, int(c), int(k))
            for q, a, b, c, k in zip(s.ravel(), z.ravel(), w.ravel(), codes.ravel(), n_esc.ravel()))
    em.csv("classify.csv", ["re_s", "im_s", "re_z", "im_z", "re_w", "im_w", "class", "n_escape"], rows)


def _green(cfg: RunConfig, em: Emitter) -> None:
    f = cfg.hmap
    sec = _section(cfg)
    s = sec.parameters((cfg.grid, cfg.grid))
    z, w = sec.points(s)
    R = escape.filtration_radius(f).R
    codes, _ = escape.classify_grid(f, z, w, cfg.n_max, R=R)
    g = escape.green_grid(f, z, w, codes, cfg.n_max, cfg.tol, R=R)
    with np.errstate(divide="ignore", invalid="ignore"):
        shade = np.log1p(np.nan_to_num(g, nan=0.0))
        top = shade.max() if shade.max() > 0 else 1.0
    em.pgm("green.pgm", (255 * shade / top).astype(np.uint8))
    rows = ((q.real, q.imag, a.real, a.imag, b.real, b.imag, v)
            for q, a, b, v in zip(s.ravel(), z.ravel(), w.ravel(), g.ravel()))
    em.csv("green.csv", ["re_s", "im_s", "re_z", "im_z", "re_w", "im_w", "green"], rows)


def _periodic(cfg: RunConfig, em: Emitter) -> None:
    orbits = saddle.find_periodic(cfg.hmap, cfg.period)
    rows = []
    for i, o in enumerate(orbits):
        for k, x in enumerate(o.points):
            rows.append((o.period, i, k, x.z.real, x.z.imag, x.w.real, x.w.imag,
                         o.lambda_s.real, o.lambda_s.imag, o.lambda_u.real, o.lambda_u.imag,
                         o.residual, o.is_saddle))
    em.csv(f"periodic_N{cfg.period}.csv",
           ["period", "orbit", "k", "re_z", "im_z", "re_w", "im_w", "re_lambda_s", "im_lambda_s",
            "re_lambda_u", "im_lambda_u", "residual", "is_saddle"], rows)
    print(f"period {cfg.period}: {len(orbits)} orbit(s)")


def _chart(cfg: RunConfig) -> manifold.StableManifoldChart:
    orbits = [o for o in saddle.find_periodic(cfg.hmap, cfg.period) if o.is_saddle]
    if not orbits:
        raise UsageError(f"no saddle orbit of period {cfg.period} found")
    if cfg.orbit is None:
        orbit = min(orbits, key=lambda o: abs(o.lambda_s))
    elif 0 <= cfg.orbit < len(orbits):
        orbit = orbits[cfg.orbit]
    else:
        raise UsageError(f"orbit index out of range (0..{len(orbits) - 1})", fields=["orbit"])
    return manifold.build_local_series(cfg.hmap, orbit, cfg.series_order)


def _manifold(cfg: RunConfig, em: Emitter) -> None:
    chart = _chart(cfg)
    Zs = []
    radii = np.geomspace(1e-3, cfg.ray_max, cfg.samples)
    for k in range(cfg.rays):
        Zs.extend(radii * np.exp(2j * np.pi * k / cfg.rays))
    for r in (0.5, 1.0, 10.0, 100.0, cfg.ray_max):
        Zs.extend(r * np.exp(2j * np.pi * np.arange(cfg.samples) / cfg.samples))
    rows = []
    for Z in Zs:
        pt, vel = manifold.eval_global(chart, complex(Z), derivative=True,
                                       fallback_bits=cfg.bits or env_bits())
        if hasattr(pt, "coords"):
            X, dX = pt.coords, vel
            speed = fs_speed_lift(X, dX)
        else:
            X = (pt.z, pt.w, 1.0)
            speed = float(fs_speed_affine_array(pt.z, pt.w, vel[0], vel[1]))
        rows.append((Z.real, Z.imag, *_reim(X[0]), *_reim(X[1]), *_reim(X[2]), speed))
    em.csv("manifold.csv", ["re_Z", "im_Z", "re_z", "im_z", "re_w", "im_w", "re_t", "im_t", "fs_speed"], rows)
    o = chart.orbit
    meta = [("period", o.period), ("re_P_z", o.P.z.real), ("im_P_z", o.P.z.imag),
            ("re_P_w", o.P.w.real), ("im_P_w", o.P.w.imag),
            ("re_lambda_s", o.lambda_s.real), ("im_lambda_s", o.lambda_s.imag),
            ("series_order", len(chart.coeffs) - 1), ("rho", chart.rho),
            ("normalization", "unit-norm first coefficient, first nonzero component real positive")]
    em.csv("manifold_meta.csv", ["key", "value"], meta)


def _reim(c):
    return (c.real, c.imag) if hasattr(c, "imag") else (c, 0.0)


def _reparam(cfg: RunConfig, em: Emitter) -> None:
    if abs(cfg.hmap.a) > 1 and not cfg.force:
        print(f"warning: |a| = {abs(cfg.hmap.a):g} > 1, outside the hypothesis |a| <= 1", file=sys.stderr)
        raise UsageError("reparam requires |a| <= 1 (use --force to override)", a=str(cfg.hmap.a))
    chart = _chart(cfg)
    pcfg = pipeline.PipelineConfig(grid=cfg.reparam_grid, injectivity_samples=cfg.injectivity_samples,
                                   mode=cfg.mode, bits=cfg.bits, green_bits_budget=cfg.green_bits_budget,
                                   seed=cfg.seed)
    result = pipeline.run_pipeline(chart, cfg.reparam_n_max, cfg.reparam_grid, pcfg,
                                   progress=lambda it: log.info("n=%d R_n=%.6g", it.n, it.R_n))
    header = ["n", "re_theta_n", "im_theta_n", "H_max", "R_n", "speed_at_0", "max_speed_half_disc",
              "injectivity_min_gap", "injectivity_log2_gap", "chain_error", "green_max", "leaf_decay",
              "pullback_error", "bits"]
    rows = [(it.n, it.theta_n.real, it.theta_n.imag, it.H_max, it.R_n, it.speed_at_0,
             it.max_speed_half_disc, it.injectivity_min_gap, it.injectivity_log2_gap, it.chain_error,
             it.green_max, it.leaf_decay, it.pullback_error, it.bits) for it in result.iterates]
    em.csv("reparam.csv", header, rows)
    summary = [("last_good_n", result.last_good_n), ("n_max", result.n_max),
               ("stop_reason", result.stop_reason or "completed"), ("slope", result.slope),
               ("expected_slope", result.expected_slope),
               ("monotone_after_burn_in", result.monotone_after_burn_in)]
    em.csv("reparam_summary.csv", ["key", "value"], summary)
    if cfg.profiles:
        for it in result.iterates:
            phi = pipeline.PhiN(chart, it.n, pcfg.mode, pcfg.bits)
            k = pipeline.Recentred(phi, it.theta_n, it.R_n)
            thetas = np.linspace(0, it.R_n / 2, 65) * np.exp(0.25j)
            em.csv(f"reparam_profile_n{it.n:02d}.csv", ["re_theta", "im_theta", "fs_speed"],
                   ((t.real, t.imag, s) for t, s in zip(thetas, k.speeds(thetas))))
    print(f"last good n = {result.last_good_n}; slope {result.slope:.6g} "
          f"(expected {result.expected_slope:.6g}); {result.stop_reason or 'completed'}")


def _gallery(cfg: RunConfig, em: Emitter) -> None:
    try:
        radii = [float(r) for r in cfg.radii.split(",")]
    except ValueError:
        raise UsageError("radii must be comma-separated numbers", fields=["radii"]) from None
    rows, verdicts = [], []
    for spec in gallery.default_gallery():
        prof = gallery.sup_speed_profile(spec, radii, cfg.angles)
        name = spec.describe()
        rows.extend((name, r, s) for r, s in prof)
        v = gallery.verdict(prof)
        verdicts.append((name, v))
        print(f"{name}: {v}")
    em.csv("gallery.csv", ["family", "radius", "max_speed"], rows)
    em.csv("gallery_verdicts.csv", ["family", "verdict"], verdicts)


def _selftest(cfg: RunConfig, em: Emitter) -> int:
    checks = acceptance.run_all(cfg.seed, cfg.quick, set(cfg.skip), stream=sys.stdout)
    rows = [(c.criterion, c.name, c.status, c.value, c.threshold) for c in checks if c.runtime is None]
    em.csv("selftest.csv", ["criterion", "check", "status", "value", "threshold"], rows)
    failed = [c for c in checks if c.passed is False]
    print(f"{len(checks) - len(failed)} of {len(checks)} checks passed or skipped")
    return 2 if failed else 0


HANDLERS = {"classify": _classify, "green": _green, "periodic": _periodic, "manifold": _manifold,
            "reparam": _reparam, "gallery": _gallery, "selftest": _selftest}


def dispatch(cfg: RunConfig) -> int:
    em = Emitter(Path(cfg.out), stream=sys.stdout)
    code = HANDLERS[cfg.command](cfg, em)
    return code or 0


def _report(exc: HenonError) -> None:
    print(json.dumps(exc.record(), default=str, sort_keys=True), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg, verbose = parse_config(argv)
    except UsageError as exc:
        _report(exc)
        return 1
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(cfg)
    except UsageError as exc:
        _report(exc)
        return 1
    except HenonError as exc:
        _report(exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
