#!/usr/bin/env python3
"""
NSV CLI
Command-line interface for discovering smooth neural state variables and
analyzing the learned dynamics.

Usage:
    nsv_cli.py pipeline --config run.json --out ./runs/spring --seed 1
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import Config, config_schema, load_pipeline_config, parse_pipeline_config
from src.exporters import JSONExporter
from src.pipeline import (
    cmd_analyze_chaos,
    cmd_analyze_cycles,
    cmd_analyze_equilibria,
    cmd_baseline,
    cmd_compare_smoothness,
    cmd_estimate_dim,
    cmd_pipeline,
    cmd_simulate,
    cmd_synthesize,
    cmd_train_embed,
    cmd_train_field,
    run_ablations,
)
from src.utils.errors import NsvError

EXIT_OK = 0

LABELLED = {
    "train-embed": cmd_train_embed,
    "train-field": cmd_train_field,
    "analyze-equilibria": cmd_analyze_equilibria,
    "analyze-chaos": cmd_analyze_chaos,
    "analyze-cycles": cmd_analyze_cycles,
    "synthesize": cmd_synthesize,
}

UNLABELLED: Dict[str, Callable] = {
    "simulate": cmd_simulate,
    "estimate-dim": cmd_estimate_dim,
    "baseline": cmd_baseline,
    "pipeline": cmd_pipeline,
    "ablate": run_ablations,
}

HELP = {
    "simulate": "Simulate the system and write the lifted dataset",
    "estimate-dim": "Estimate the intrinsic dimension of the observations",
    "train-embed": "Train the smooth embedding and encode every split",
    "train-field": "Train the neural state vector field",
    "analyze-equilibria": "Find equilibria, check stability, estimate frequencies",
    "analyze-chaos": "Coverage rates, chaos classes and near-pair divergence",
    "analyze-cycles": "Detect limit cycles in long field rollouts",
    "synthesize": "Damped rollouts for every damping factor",
    "baseline": "Train and analyze the unregularized baseline",
    "pipeline": "Run every stage",
    "ablate": "Seed-matched training ablations",
    "compare-smoothness": "Smoothness table of several runs",
    "schema": "Print the JSON schema of the config document",
}


def setup_logging(verbose: bool = False):
    """Configure logging."""
    level = logging.DEBUG if verbose else getattr(logging, Config.LOG_LEVEL, logging.INFO)
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description=f'{Config.APP_NAME}: discover smooth neural state variables and analyze learned dynamics',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  nsv_cli.py simulate --config spring.json --out ./runs/spring
  nsv_cli.py train-embed --out ./runs/spring --seed 2
  nsv_cli.py pipeline --config pendulum.json --out ./runs/pendulum
  nsv_cli.py schema > schema.json

Exit codes: 0 ok, 2 validation, 3 runtime, 4 provenance mismatch
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {Config.APP_VERSION}')
    sub = parser.add_subparsers(dest='command', required=True)

    for name, text in HELP.items():
        cmd = sub.add_parser(name, help=text, description=text)
        if name == 'schema':
            continue
        cmd.add_argument('--config', help='Config document (JSON); defaults when omitted')
        cmd.add_argument('--seed', type=int, help='Override the config seed')
        cmd.add_argument('--out', '--output', dest='out', help=f'Run directory (default: {Config.OUTPUT_DIR})')
        cmd.add_argument('--dry-run', action='store_true', help='Validate config and inputs, then stop')
        cmd.add_argument('--verbose', '-v', action='store_true', help='Verbose output')
        if name in LABELLED:
            cmd.add_argument('--label', default='smooth', help='Run label (default: smooth)')
        if name == 'compare-smoothness':
            cmd.add_argument('--labels', nargs='+', default=['smooth', 'baseline'],
                             help='Run labels to compare (default: smooth baseline)')
    return parser


def report_error(error: NsvError) -> int:
    """Print a one-line structured error and return its exit code."""
    print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stderr)
    return error.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == 'schema':
        print(JSONExporter.dumps(config_schema()), end='')
        return EXIT_OK

    setup_logging(args.verbose)
    logger = logging.getLogger(__name__)
    command_line = list(sys.argv if argv is None else ['nsv_cli.py'] + list(argv))

    try:
        cfg = load_pipeline_config(args.config)
        if args.seed is not None:
            cfg = parse_pipeline_config({**cfg.model_dump(), "seed": args.seed})
        out = args.out or cfg.output_dir

        if args.command in LABELLED:
            result = LABELLED[args.command](cfg, out, args.label, args.dry_run, command_line)
        elif args.command == 'compare-smoothness':
            result = cmd_compare_smoothness(cfg, out, args.labels, args.dry_run, command_line)
        else:
            result = UNLABELLED[args.command](cfg, out, dry_run=args.dry_run, command_line=command_line)
    except NsvError as e:
        logger.error(f"{args.command} failed: {e}")
        return report_error(e)

    print(JSONExporter.dumps(result), end='')
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
