import argparse
import logging
import sys
from multiprocessing import Pool
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from scaled_sojourn.exceptions import ConfigError, ScaledSojournError
from scaled_sojourn.io.config import load_scenario
from scaled_sojourn.io.reports import Report, emit_reports, parse_reports
from scaled_sojourn.sim.engine import run
from scaled_sojourn.sim.scenario import Scenario

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

Job = Tuple[str, Scenario, Path, List[Report]]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scaled-sojourn",
        description="Simulate a single-link queue and compare queue-delay estimators.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run_cmd = commands.add_parser("run", help="run one or more scenarios")
    run_cmd.add_argument("scenarios", nargs="+",
                         help="scenario files, or names of bundled scenarios")
    run_cmd.add_argument("--out", type=Path, default=Path("."),
                         help="output directory (one sub-directory per scenario in a batch)")
    run_cmd.add_argument("--report", default="trace",
                         help="comma separated: " + ",".join(r.value for r in Report))
    run_cmd.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="KEY=VALUE", help="override a scenario key, repeatable")
    run_cmd.add_argument("--seed", type=int, default=None, help="shorthand for --set seed=N")
    run_cmd.add_argument("--jobs", type=int, default=1, help="scenarios to run in parallel")
    return parser


def _label(ref: str) -> str:
    return Path(ref).stem


def run_job(job: Job) -> Tuple[str, List[Path], Optional[str]]:
    label, scenario, out_dir, reports = job
    trace = run(scenario)
    written = emit_reports(trace, out_dir, reports, label=label)
    table = next((p for p in written if p.suffix == ".txt"), None)
    return label, written, None if table is None else table.read_text(encoding="utf-8")


def _run(args) -> int:
    reports = parse_reports(args.report)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")

    jobs = []
    for ref in args.scenarios:
        try:
            scenario = load_scenario(ref, overrides)
        except ConfigError as e:
            raise ConfigError(f"{ref}: {e}") from e
        out_dir = args.out if len(args.scenarios) == 1 else args.out / _label(ref)
        jobs.append((_label(ref), scenario, out_dir, reports))

    if args.jobs > 1 and len(jobs) > 1:
        with Pool(min(args.jobs, len(jobs))) as pool:
            results = pool.map(run_job, jobs)
    else:
        results = [run_job(job) for job in jobs]

    for label, written, table in results:
        log.info(f"{label}: wrote {', '.join(str(p) for p in written)}")
        if table is not None:
            print(f"{label}\n{table}", end="")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return _run(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ScaledSojournError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        log.debug("run failed", exc_info=True)
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
