#!/usr/bin/env python3
"""Run all four stability sweeps and drop analysis-ready CSVs in one place.

Usage:
    python scripts/run_sweeps.py --out-dir results/ [--seed 7] [--tol 1e-10]

Each sweep writes `<name>.csv` plus `<name>.csv.inputs.json` with the exact
inputs keyed by the per-row hash, so any row can be recomputed later.
"""

import argparse
import pathlib

import numpy as np

from logmink.experiments import ExperimentConfig, run_experiment, write_rows

SWEEPS = {
    "inverse_stability": dict(
        grid=tuple(np.geomspace(3e-5, 2.4e-2, 10)), delta=0.1, tau=0.3
    ),
    "forward_continuity": dict(grid=tuple(np.geomspace(1e-4, 2e-2, 10))),
    "phi_s_degeneration": dict(grid=(1.0, 2.0, 4.0, 8.0, 16.0, 32.0)),
    "qt_divergence": dict(grid=(0.5, 1.0, 2.0, 5.0, 10.0)),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--tol", type=float, default=1e-10)
    args = parser.parse_args()

    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, overrides in SWEEPS.items():
        cfg = ExperimentConfig(
            experiment=name, seed=args.seed, tol=args.tol, **overrides
        )
        rows, summary = run_experiment(cfg)
        path = out_dir / f"{name}.csv"
        write_rows(rows, path)
        print(f"{name}: {len(rows)} rows -> {path}")
        for key, value in summary.items():
            print(f"    {key} = {value}")


if __name__ == "__main__":
    main()
