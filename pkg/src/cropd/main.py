import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

import torch
from dotenv import load_dotenv

from cropd.exceptions import CropdError
from cropd.runner.exceptions import ConfigError
from cropd.runner.experiment import run_experiment, run_stages, run_suite
from cropd.runner.report import emit_report, markdown_table
from cropd.runner.results import ResultsRecord, load_results

# Load environment variables
load_dotenv(override=True)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_STAGE_ERROR = 3

STAGE_VERBS = {
    "gen-data": "gen_data",
    "pretrain": "pretrain",
    "train-preproc": "train_preproc",
    "train-head": "train_head",
    "eval": "eval",
    "theory": "theory",
}


ATTACK_PRESETS = ("fgsm", "pgd10", "pgd20", "robust_head")


def _add_override_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config field, e.g. --set threat.epsilon=8/255 (repeatable)",
    )
    parser.add_argument(
        "--attack",
        dest="attacks",
        action="append",
        choices=ATTACK_PRESETS,
        default=[],
        help="Evaluation attack preset (repeatable); replaces threat.eval_attacks",
    )
    parser.add_argument("--eps", default=None, help="Attack budget, e.g. 8/255; sets threat.epsilon")
    parser.add_argument("--norm", choices=("inf", "2"), default=None, help="Threat-model norm; sets threat.norm")


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="Path to a JSON experiment config")
    _add_override_arguments(parser)


def config_overrides(args: argparse.Namespace) -> list[str]:
    """`--set` values followed by the threat-model shorthands as key=value overrides."""
    overrides = list(args.overrides)
    if args.attacks:
        overrides.append(f"threat.eval_attacks={json.dumps(args.attacks)}")
    if args.eps is not None:
        overrides.append(f"threat.epsilon={json.dumps(args.eps)}")
    if args.norm is not None:
        overrides.append(f"threat.norm={json.dumps(args.norm)}")
    return overrides


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(prog="cropd", description="Contrastive robust pre-processing laboratory")
    parser.add_argument(
        "--debug",
        action="store_true",
        default=os.getenv("CROPD_DEBUG", "") not in ("", "0"),
        help="Enable debug mode",
    )
    parser.add_argument("--no-spinner", action="store_true", default=False, help="Disable the stage spinner")
    commands = parser.add_subparsers(dest="command", required=True)

    for verb, stage in STAGE_VERBS.items():
        _add_config_arguments(commands.add_parser(verb, help=f"Run the pipeline up to the {stage} stage"))
    _add_config_arguments(commands.add_parser("run", help="Run the full pipeline and write results"))

    suite = commands.add_parser("suite", help="Run several configs")
    suite.add_argument("configs", nargs="*", help="Config files")
    suite.add_argument("--parallelism", type=int, default=1, help="Worker processes")
    suite.add_argument("--out", default=None, help="Also emit a report into this directory")
    _add_override_arguments(suite)

    report = commands.add_parser("report", help="Build report.md and plot-data CSVs from results")
    report.add_argument("results", nargs="+", help="results.json files or run directories")
    report.add_argument("--out", required=True, help="Report directory")

    return parser.parse_args(argv)


def configure(debug: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    threads = os.getenv("CROPD_NUM_THREADS")
    if threads:
        torch.set_num_threads(int(threads))


def _print_record(record: ResultsRecord) -> None:
    print(markdown_table([record]))
    print(f"Results: {record.output_dir}")


def dispatch(args: argparse.Namespace) -> int:
    spinner = not args.no_spinner
    if args.command in STAGE_VERBS:
        runtime = run_stages(
            args.config, STAGE_VERBS[args.command], config_overrides(args), debug=args.debug, spinner=spinner
        )
        print(json.dumps([{"seed": s, "stage": st, "status": status} for s, st, status in runtime.stage_log], indent=2))
        return EXIT_OK

    if args.command == "run":
        _print_record(run_experiment(args.config, config_overrides(args), debug=args.debug, spinner=spinner))
        return EXIT_OK

    if args.command == "suite":
        outcomes = run_suite(args.configs, parallelism=args.parallelism, overrides=config_overrides(args))
        records = [o for o in outcomes if isinstance(o, ResultsRecord)]
        failures = [o for o in outcomes if not isinstance(o, ResultsRecord)]
        for failure in failures:
            print(f"FAILED {failure.config_path}: {failure.error}", file=sys.stderr)
        if records:
            print(markdown_table(records))
            if args.out:
                emit_report(records, args.out)
        return EXIT_STAGE_ERROR if failures else EXIT_OK

    paths = emit_report([load_results(path) for path in args.results], args.out)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    configure(args.debug)
    try:
        return dispatch(args)
    except ConfigError as e:
        print(f"Config error: {str(e)}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except CropdError as e:
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_STAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
