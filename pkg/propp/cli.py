"""Command-line entry point: ``propp analyze | simulate | demo-data``.

Exit codes: 0 on success, 1 on invalid input, 2 when a method fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

from .config import AnalysisConfig
from .errors import DomainError, InputError, MethodFailure
from .io.dataset_io import read_dataset
from .io.demo import demo_csv, generate_demo_frame
from .io.results import atomic_write_text, metrics_csv, write_metrics_csv
from .pipeline import AnalysisPipeline, entropy_seed
from .propensity.weights import WeightVariant
from .simulation.runner import run_grid
from .simulation.scenarios import DEFAULT_GRID, DEFAULT_METHODS, Scenario, ScenarioConfig, Setting

logger = logging.getLogger("propp")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_METHOD = 2


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as input errors instead of exiting with status 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _name_list(text: str) -> list[str]:
    return [v.strip().lower() for v in text.split(",") if v.strip()]


def _beta_pair(text: str) -> tuple[float, float]:
    values = _float_list(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return values[0], values[1]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-v", "--verbose", action="store_true", help="Debug logging")


def build_parser() -> argparse.ArgumentParser:
    defaults = AnalysisConfig(seed=0)
    ap = _Parser(prog="propp", description="Propensity-weighted power prior borrowing")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="Posterior for the trial response rate")
    a.add_argument("--data", required=True, help="Dataset CSV (source,outcome,covariates...)")
    a.add_argument("--method", default=defaults.method,
                   help="ignore | pool | mpp | propp | fixed:<delta> | wang:<fraction> "
                        f"(default: {defaults.method})")
    a.add_argument("--weight-scheme", default=defaults.weight_scheme,
                   choices=[v.value for v in WeightVariant],
                   help=f"Propensity weighting (default: {defaults.weight_scheme})")
    a.add_argument("--cap", action=argparse.BooleanOptionalAction, default=defaults.cap,
                   help="Bound external weights by 1 (default: on)")
    a.add_argument("--delta-prior", type=_beta_pair, default=defaults.delta_prior,
                   help="Beta prior a,b on the power parameter (default: 1,1)")
    a.add_argument("--samples", type=int, default=defaults.n_samples,
                   help=f"Posterior draws (default: {defaults.n_samples})")
    a.add_argument("--seed", type=int, default=None, help="Random seed (default: from entropy)")
    a.add_argument("--ridge", type=float, default=defaults.ridge,
                   help=f"Propensity ridge penalty (default: {defaults.ridge:g})")
    a.add_argument("--weight-floor", type=float, default=defaults.weight_floor,
                   help="Zero external weights below this value (default: 0)")
    a.add_argument("--strata", type=int, default=defaults.n_strata,
                   help=f"Strata for wang:<fraction> (default: {defaults.n_strata})")
    a.add_argument("--grid-size", type=int, default=defaults.grid_size,
                   help=f"Delta sampler envelope grid (default: {defaults.grid_size})")
    a.add_argument("--record-timing", action="store_true",
                   help="Include wall-clock timings in the result document")
    a.add_argument("--out", help="Result JSON path (default: stdout)")
    _add_common(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="Operating characteristics over a grid")
    s.add_argument("--scenario", default=Scenario.DRIFT.value, choices=[v.value for v in Scenario])
    s.add_argument("--setting", default=Setting.EQUAL.value, choices=[v.value for v in Setting])
    s.add_argument("--grid", type=_float_list, default=None,
                   help="Comma list of eta (drift) or mu_e values (default: -0.5..0.5, 9 points)")
    s.add_argument("--replicates", type=int, default=1000, help="Replicates per grid value (default: 1000)")
    s.add_argument("--methods", type=_name_list, default=list(DEFAULT_METHODS),
                   help=f"Comma list (default: {','.join(DEFAULT_METHODS)})")
    s.add_argument("--seed", type=int, default=None, help="Random seed (default: from entropy)")
    s.add_argument("--samples", type=int, default=10_000, help="Posterior draws per fit (default: 10000)")
    s.add_argument("--superfluous", type=int, default=None,
                   help="Zero this many leading coefficients, keeping their sum")
    s.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1)")
    s.add_argument("--out", help="Metrics CSV path (default: stdout)")
    _add_common(s)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("demo-data", help="Write the synthetic melanoma cohort")
    d.add_argument("--out", required=True, help="CSV path")
    d.add_argument("--seed", type=int, default=None, help="Random seed (default: from entropy)")
    _add_common(d)
    d.set_defaults(func=cmd_demo_data)
    return ap


def cmd_analyze(args: argparse.Namespace) -> int:
    config = AnalysisConfig(
        method=args.method,
        delta_prior=args.delta_prior,
        n_samples=args.samples,
        grid_size=args.grid_size,
        seed=args.seed,
        weight_scheme=args.weight_scheme,
        cap=args.cap,
        ridge=args.ridge,
        weight_floor=args.weight_floor,
        n_strata=args.strata,
    )
    data = read_dataset(args.data)
    document = AnalysisPipeline(config, record_timing=args.record_timing).run(data)
    if args.out:
        document.write(args.out)
        for name, summary in document.posteriors.items():
            print(f"  {name:>16}: mean {summary.mean:.4f}  "
                  f"95% CI ({summary.q025:.4f}, {summary.q975:.4f})")
        print(f"Wrote {args.out}")
    else:
        sys.stdout.write(document.to_json())
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    seed = entropy_seed() if args.seed is None else args.seed
    overrides = dict(
        replicates=args.replicates, methods=tuple(args.methods), seed=seed, n_samples=args.samples
    )
    if args.superfluous is not None:
        overrides["n_superfluous"] = args.superfluous
    cfg = ScenarioConfig.build(args.scenario, args.setting, **overrides)
    grid = args.grid if args.grid is not None else list(DEFAULT_GRID)
    logger.info("simulate %s seed=%d", cfg.describe(), seed)

    rows = run_grid(cfg, grid, workers=args.workers)
    context = dict(scenario=cfg.scenario.value, setting=cfg.setting.value,
                   superfluous=cfg.n_superfluous, seed=seed)
    if args.out:
        write_metrics_csv(rows, args.out, **context)
        print(f"Wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(metrics_csv(rows, **context))
    return EXIT_OK


def cmd_demo_data(args: argparse.Namespace) -> int:
    seed = entropy_seed() if args.seed is None else args.seed
    frame = generate_demo_frame(seed)
    atomic_write_text(args.out, demo_csv(frame))
    counts = frame.groupby("source")["outcome"].agg(["size", "sum"])
    print(f"Wrote {args.out} (seed {seed})")
    for source, row in counts.iterrows():
        print(f"  {source:>8}: {row['size']} patients, {row['sum']} responders")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except MethodFailure as exc:
        print(f"method failed: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except (InputError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
