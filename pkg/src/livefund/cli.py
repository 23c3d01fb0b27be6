"""``livefund`` command line: run, metrics, report, validate-fixtures.

Exit codes:

==  =====================================================
0   success
1   unexpected failure
2   configuration or usage error
3   leakage violation (data dated after the simulation clock)
4   ledger corruption or storage failure
5   missing API credential
6   unknown or empty run
7   fixture validation failed
8   market data unavailable (unknown ticker, no price)
==  =====================================================
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from livefund.config import BUNDLED_CONFIG, AppConfig, build_gateway, build_llm, load_config
from livefund.errors import ConfigError, FixtureValidationError, LivefundError
from livefund.ledger import Ledger
from livefund.market.models import ClockMode
from livefund.market.replay import validate_fixture_dir
from livefund.metrics import MetricParams
from livefund.report import benchmark_series, describe, leaderboard_csv, leaderboard_json, run_report, write_report
from livefund.workflow import run_period

log = logging.getLogger("livefund")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _load(args) -> AppConfig:
    app = load_config(
        args.config or BUNDLED_CONFIG,
        run_id=getattr(args, "run_id_override", None),
        fixtures=args.fixtures,
        runs_dir=args.runs_dir,
    )
    if not args.log_level:
        logging.getLogger().setLevel(app.log_level)
    return app


def _metric_params(app: AppConfig, benchmark: str | None) -> MetricParams:
    source = benchmark or app.benchmark
    market = benchmark_series(source, app.fixtures) if source else None
    return MetricParams(market_series=market)


def cmd_run(args) -> int:
    args.run_id_override = args.run_id
    app = _load(args)
    mode = ClockMode.LIVE if args.mode == "live" else ClockMode.REPLAY
    gateway = build_gateway(app, args.mode)
    llm = build_llm(app)
    ledger = Ledger(app.runs_dir)
    summary = run_period(app.run, gateway, llm, ledger, mode=mode)
    for line in summary.lines():
        print(line)
    print(f"ledger: {ledger.run_path(app.run.run_id)}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    app = _load(args)
    ledger = Ledger(app.runs_dir)
    report = run_report(ledger, args.run_id, _metric_params(app, args.benchmark))
    for line in describe(report):
        print(line)
    out = Path(args.out) if args.out else app.runs_dir / "metrics"
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{args.run_id}.csv").write_text(leaderboard_csv([report]), encoding="utf-8")
    (out / f"{args.run_id}.json").write_text(leaderboard_json([report]), encoding="utf-8")
    print(f"wrote {out / (args.run_id + '.csv')} and .json")
    return EXIT_OK


def cmd_report(args) -> int:
    if not args.run_id:
        raise ConfigError("report needs at least one --run-id")
    app = _load(args)
    ledger = Ledger(app.runs_dir)
    out = Path(args.out) if args.out else app.runs_dir / "report"
    reports = write_report(ledger, args.run_id, out, _metric_params(app, args.benchmark),
                           timestamp=not args.no_timestamp)
    for rank, r in enumerate(sorted(reports, key=lambda r: -r.cr), start=1):
        print(f"{rank}. {r.model}: CR {r.cr:.2f}%")
    print(f"wrote {out}/leaderboard.csv, leaderboard.json, leaderboard.html and series/")
    return EXIT_OK


def cmd_validate_fixtures(args) -> int:
    root = args.fixtures or args.path
    if root is None:
        raise ConfigError("validate-fixtures needs a fixture directory")
    verdicts = validate_fixture_dir(root)
    failed = 0
    for v in verdicts:
        if v.ok:
            print(f"ok    {v.path}")
        else:
            failed += 1
            for problem in v.problems:
                print(f"FAIL  {v.path}: {problem}")
    if failed:
        raise FixtureValidationError(f"{failed} of {len(verdicts)} fixture files failed validation")
    print(f"{len(verdicts)} files ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="livefund", description="Run and score LLM-managed replay funds.")
    parser.add_argument("--log-level", default=None, help="override the configured log level")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, run_id_many=False):
        p.add_argument("--config", help="TOML config file (default: bundled config)")
        p.add_argument("--fixtures", help="replay fixture directory (overrides config)")
        p.add_argument("--runs-dir", help="ledger directory (overrides config)")
        if run_id_many:
            p.add_argument("--run-id", action="append", default=[], help="run to include; repeatable")
        else:
            p.add_argument("--run-id", help="run identifier")

    p = sub.add_parser("run", help="run a fund over the configured period")
    common(p)
    p.add_argument("--mode", choices=["replay", "live"], default="replay")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("metrics", help="compute metrics for one run")
    common(p)
    p.add_argument("--benchmark", help="benchmark ticker in the fixtures, or a ticker fixture directory")
    p.add_argument("--out", help="output directory (default: <runs>/metrics)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("report", help="write leaderboard files for several runs")
    common(p, run_id_many=True)
    p.add_argument("--benchmark", help="benchmark ticker in the fixtures, or a ticker fixture directory")
    p.add_argument("--out", help="output directory (default: <runs>/report)")
    p.add_argument("--no-timestamp", action="store_true", help="omit the generation time from the HTML")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("validate-fixtures", help="check a replay fixture directory")
    p.add_argument("path", nargs="?", help="fixture directory")
    p.add_argument("--fixtures", help="fixture directory")
    p.set_defaults(func=cmd_validate_fixtures)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "metrics" and not args.run_id:
        parser.error("metrics needs --run-id")
    logging.basicConfig(
        level=(args.log_level or "WARNING").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except LivefundError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if isinstance(exc, ConfigError) and args.command == "report" and not args.run_id:
            parser.print_usage(sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
