"""Speed profiles of the example curves, plus ray diagnostics for the
non-Brody witnesses.

    python3 scripts/gallery_profiles.py --radii 1,2,5,10,20,30,50,100
"""

from __future__ import annotations

import argparse
import math

import numpy as np

from henon_brody.gallery import CurveSpec, default_gallery, ray_speeds, sup_speed_profile, verdict


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--radii", default="1,2,5,10,20,30,50")
    ap.add_argument("--angles", type=int, default=720)
    args = ap.parse_args()
    radii = [float(r) for r in args.radii.split(",")]

    print("family".ljust(42) + "".join(f"{r:>11g}" for r in radii) + "  verdict")
    for spec in default_gallery():
        prof = sup_speed_profile(spec, radii, args.angles)
        print(spec.describe().ljust(42) + "".join(f"{s:11.4g}" for _, s in prof) + f"  {verdict(prof)}")

    bs = np.array([5.0, 10.0, 20.0, 50.0])
    print("\nexp-quadratic along z = bi:", ", ".join(
        f"b={b:g}: {s:.4g}" for b, s in zip(bs, ray_speeds(CurveSpec("exp-quadratic"), 1j, bs))))
    for n in (2, 3, 4):
        d = np.exp(1j * math.pi / (2 * n))  # Re z^n = 0 on this ray
        s = ray_speeds(CurveSpec("graph-exp-power", n=n), d, bs)
        print(f"graph-exp-power n={n} along Re z^n = 0:", ", ".join(f"b={b:g}: {v:.4g}" for b, v in zip(bs, s)))


if __name__ == "__main__":
    main()
