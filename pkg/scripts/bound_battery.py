#!/usr/bin/env python3
"""Domination battery: empirical RMS error vs the explicit-constant Gaussian bound.

Sweeps dimensions x masks x sample sizes, runs each config with a fixed seed,
and checks empirical <= bound + 3 SE everywhere.  Exit code 2 if any config
violates the bound (it should not: the bound holds for the exact expectation).

    python3 scripts/bound_battery.py --trials 100 --out battery.csv
"""

import argparse

from maskcov.cli_io import emit_csv
from maskcov.experiments import ExperimentConfig, StudyRow, run_variance_experiment
from maskcov.masks import all_ones_mask, banded_mask
from maskcov.models import CovarianceSpec, DistributionSpec


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--rho", type=float, default=0.6)
    ap.add_argument("--seed", type=int, default=505)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = []
    failures = 0
    print(f"{'p':>4} {'mask':>9} {'n':>6} {'rms':>12} {'bound':>12} {'ratio':>8}  ok")
    for p in (16, 64):
        masks = {
            "banded5": banded_mask(p, 5),
            "identity": banded_mask(p, 1),
            "all_ones": all_ones_mask(p),
        }
        for name, mask in masks.items():
            for n in (128, 1024):
                cfg = ExperimentConfig(
                    model=DistributionSpec(CovarianceSpec.ar1(p, args.rho), "gaussian"),
                    mask=mask,
                    n=n,
                    trials=args.trials,
                    seed=args.seed,
                )
                res = run_variance_experiment(cfg)
                ok = res.empirical_rms <= res.theoretical.total + 3.0 * res.std_error
                failures += 0 if ok else 1
                rows.append(StudyRow(axis="n", value=float(n), result=res))
                print(
                    f"{p:4d} {name:>9} {n:6d} {res.empirical_rms:12.5e} "
                    f"{res.theoretical.total:12.5e} {res.ratio:8.4f}  {'yes' if ok else 'NO'}"
                )
    if args.out:
        emit_csv(rows, args.out)
        print(f"wrote {args.out}")
    if failures:
        print(f"{failures} config(s) violated the bound")
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
