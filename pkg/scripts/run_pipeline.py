"""Run the reparametrization pipeline on a map and print one row per iterate.

    python3 scripts/run_pipeline.py --mode binary64 --n-max 10
    python3 scripts/run_pipeline.py --mode ladder --n-max 25
"""

from __future__ import annotations

import argparse
import time

from henon_brody.acceptance import default_orbit
from henon_brody.manifold import build_local_series
from henon_brody.mapspec import parse_map
from henon_brody.pipeline import MODES, PipelineConfig, run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--map", default="p = z^2 - 6; a = 0.5")
    ap.add_argument("--period", type=int, default=1)
    ap.add_argument("--mode", choices=MODES, default="binary64")
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--grid", type=int, default=48)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    f = parse_map(args.map)
    chart = build_local_series(f, default_orbit(f, args.period), 20)
    cfg = PipelineConfig(grid=args.grid, mode=args.mode, seed=args.seed)
    t0 = time.perf_counter()
    print(f"{'n':>3} {'t(s)':>7} {'R_n':>12} {'|theta_n|':>10} {'speed0-1':>10} {'half':>7} "
          f"{'chain':>9} {'log2 gap':>10} {'g+':>5} {'decay':>8} {'bits':>6}")

    def show(it):
        print(f"{it.n:3d} {time.perf_counter() - t0:7.1f} {it.R_n:12.5e} {abs(it.theta_n):10.3e} "
              f"{it.speed_at_0 - 1:10.1e} {it.max_speed_half_disc:7.4f} {it.chain_error:9.1e} "
              f"{it.injectivity_log2_gap:10.1f} {it.green_max:5.1g} {it.leaf_decay:8.5f} {it.bits or '-':>6}",
              flush=True)

    res = run_pipeline(chart, args.n_max, args.grid, cfg, progress=show)
    print(f"slope {res.slope:.5f} (expected {res.expected_slope:.5f}); "
          f"monotone after burn-in: {res.monotone_after_burn_in}; {res.stop_reason or 'completed'}")


if __name__ == "__main__":
    main()
