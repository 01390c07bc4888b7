#!/usr/bin/env python3
"""Full simulation study: every scenario x setting, plus the superfluous-covariate sweep.

One metrics CSV per cell goes to the output directory. Slow at the default
replicate count; use --workers to spread replicates over processes.

Usage:
    python scripts/run_simulation_study.py --replicates 200 --workers 8
    python scripts/run_simulation_study.py --scenarios drift,mixture --settings equal
"""

import argparse
import logging
import time
from pathlib import Path

from propp.io.results import write_metrics_csv
from propp.simulation.runner import run_grid
from propp.simulation.scenarios import DEFAULT_GRID, Scenario, ScenarioConfig, Setting


def main():
    ap = argparse.ArgumentParser(description="Scenario x setting operating characteristics")
    ap.add_argument("--scenarios", default=",".join(s.value for s in Scenario),
                    help="Comma list (default: all)")
    ap.add_argument("--settings", default=",".join(s.value for s in Setting),
                    help="Comma list (default: all)")
    ap.add_argument("--replicates", type=int, default=1000, help="Replicates per grid value (default: 1000)")
    ap.add_argument("--samples", type=int, default=10_000, help="Posterior draws per fit (default: 10000)")
    ap.add_argument("--seed", type=int, default=2024, help="Study seed (default: 2024)")
    ap.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1)")
    ap.add_argument("--out-dir", default="output/simulation", help="Output directory (default: output/simulation)")
    args = ap.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    out_dir = Path(args.out_dir)
    scenarios = [Scenario(s.strip()) for s in args.scenarios.split(",")]
    settings = [Setting(s.strip()) for s in args.settings.split(",")]

    cells = []
    for scenario in scenarios:
        if scenario is Scenario.SUPERFLUOUS:
            # Sweep the number of zeroed coefficients in the base setting only
            for m in range(1, 5):
                cells.append((scenario, Setting.EQUAL, m))
            continue
        for setting in settings:
            cells.append((scenario, setting, 0))

    start = time.monotonic()
    for scenario, setting, m in cells:
        cfg = ScenarioConfig.build(
            scenario, setting,
            replicates=args.replicates, n_samples=args.samples, seed=args.seed, n_superfluous=m,
        )
        name = f"{scenario.value}_{setting.value}" + (f"_m{m}" if m else "")
        print(f"\n== {name} ==")
        rows = run_grid(cfg, list(DEFAULT_GRID), workers=args.workers)
        path = write_metrics_csv(
            rows, out_dir / f"{name}.csv",
            scenario=scenario.value, setting=setting.value, superfluous=m, seed=args.seed,
        )
        for row in rows:
            print(f"  {row.method:>7} {cfg.grid_variable}={row.grid_value:+.3f}  "
                  f"rmse {row.rmse:.4f}  type1 {row.type1:.3f}  failures {row.failures}")
        print(f"  -> {path}")

    print(f"\nDone in {time.monotonic() - start:.0f}s")


if __name__ == "__main__":
    main()
