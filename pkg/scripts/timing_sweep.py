#!/usr/bin/env python3
"""Wall-clock scaling of the fused pipeline over growing scene sizes."""

import argparse
import csv
import time

import numpy as np

from hsad.pipeline import RunConfig, detect
from hsad.synth import SceneSpec, gen_scene


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sides", type=int, nargs="+", default=[32, 64, 128])
    parser.add_argument("--bands", type=int, default=30)
    parser.add_argument("--mode", default="fused", choices=["classical", "quantum", "fused"])
    parser.add_argument("--output", default="timing_sweep.csv")
    args = parser.parse_args()

    rows = []
    for side in args.sides:
        scene, _ = gen_scene(SceneSpec(height=side, width=side, bands=args.bands, seed=23))
        t0 = time.perf_counter()
        result = detect(scene, RunConfig(mode=args.mode, seed=23))
        elapsed = time.perf_counter() - t0
        rows.append((side, side * side, elapsed))
        stages = ", ".join(f"{k}={v:.2f}s" for k, v in result.stage_seconds.items())
        print(f"{side}x{side}x{args.bands}: {elapsed:.2f}s ({stages})")

    if len(rows) >= 2:
        log_sizes = np.log([r[1] for r in rows])
        log_times = np.log([r[2] for r in rows])
        slope = np.polyfit(log_sizes, log_times, 1)[0]
        print(f"wall-clock grows like pixels^{slope:.2f}")

    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["side", "pixels", "seconds"])
        writer.writerows(rows)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
