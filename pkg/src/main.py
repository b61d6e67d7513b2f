#!/usr/bin/env python3
"""
FedHAP Simulator - Main CLI Application

Trains federated hashing models on a dataset split across simulated
clients and reports Hamming-ranking retrieval metrics.

Usage:
    python -m src.main run --config demo.json
    python -m src.main sweep --config config.json --axis ablation --values full,no_prototypes
    python -m src.main gen-data --spec synthetic.json --out data.csv
"""

import argparse
import functools
import json
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import RunConfig, load_config
from src.data import Dataset, SyntheticSpec, generate_synthetic, load_csv, save_csv, split_indices
from src.errors import (
    ConfigurationError,
    FedHapError,
    TrainingAborted,
    UsageError,
)
from src.federation import load_snapshot, run_federation
from src.logging_setup import setup_logging
from src.reporting import ReportWriter
from src.retrieval import RetrievalEvaluator, evaluate_model

logger = logging.getLogger('src.main')

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_ABORTED = 3

# sweep axis -> config key
SWEEP_AXES = {
    'ablation': 'ablation',
    'clients': 'clients',
    'bits': 'code_bits',
    'distance': 'distance',
    'partition': 'partition',
    'mu': 'mu',
    'lambda': 'lambda',
}


def parse_arguments(argv: Optional[List[str]] = None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        prog='fedhap',
        description='FedHAP Simulator - federated hashing with global prototypes',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    # Small synthetic demo
    python -m src.main run --config demo.json --out results/demo

    # Compare the four ablation modes
    python -m src.main sweep --config config.json --axis ablation \\
        --values full,no_prototypes,adversarial_only,triplet_only

    # Write the default synthetic benchmark to CSV
    python -m src.main gen-data --spec synthetic.json --out blobs.csv
        """
    )
    sub = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, default=None,
                        help='Path to config.json file (default: auto-detect)')
    common.add_argument('--seed', type=int, default=None, help='Run seed (overrides config)')
    common.add_argument('--jobs', type=int, default=None,
                        help='Client worker threads (default: min(clients, CPU count))')
    common.add_argument('--out', type=str, default=None, help='Output directory (overrides config)')
    common.add_argument('--map-topn', type=int, default=None,
                        help='Truncate mAP rankings to the top N (default: whole database)')
    common.add_argument('-v', '--verbose', action='store_true', help='Enable debug output')

    run = sub.add_parser('run', parents=[common], help='Run one federated experiment')
    run.add_argument('--resume', type=str, default=None, help='Snapshot to resume from')
    run.add_argument('--export-codes', action='store_true',
                     help='Also write codes.csv with the final database codes per client')

    sweep = sub.add_parser('sweep', parents=[common], help='One run per value of a config axis')
    sweep.add_argument('--axis', required=True, choices=sorted(SWEEP_AXES), help='Axis to sweep')
    sweep.add_argument('--values', required=True, help='Comma-separated values')

    gen = sub.add_parser('gen-data', help='Write a synthetic dataset as CSV')
    gen.add_argument('--spec', type=str, default=None, help='JSON file with synthetic settings')
    gen.add_argument('--out', type=str, required=True, help='Output CSV path')
    gen.add_argument('-v', '--verbose', action='store_true', help='Enable debug output')

    return parser.parse_args(argv)


def build_config(args) -> RunConfig:
    """Config file merged over defaults, then CLI overrides."""
    data = load_config(args.config)
    overrides = {
        'seed': args.seed,
        'jobs': args.jobs,
        'output_dir': args.out,
        'map_topn': args.map_topn,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(data)


def load_dataset(cfg: RunConfig) -> Dataset:
    """The configured CSV file, or the synthetic benchmark when none is set."""
    if cfg.dataset_csv:
        logger.info("Loading dataset from %s", cfg.dataset_csv)
        return load_csv(cfg.dataset_csv)
    logger.info("Generating synthetic dataset: %d classes x %d samples, d=%d",
                cfg.synthetic.classes, cfg.synthetic.per_class, cfg.synthetic.dim)
    return generate_synthetic(cfg.synthetic)


def execute_run(cfg: RunConfig, out_dir, resume: Optional[str] = None,
                export_codes: bool = False, dataset: Optional[Dataset] = None) -> Dict:
    """
    Train, evaluate and write every artifact of one run.

    Args:
        cfg: Run configuration
        out_dir: Directory for the run's files
        resume: Optional snapshot to continue from
        export_codes: Also write codes.csv
        dataset: Preloaded dataset (loaded from cfg when None)

    Returns:
        The final retrieval report
    """
    dataset = dataset if dataset is not None else load_dataset(cfg)
    writer = ReportWriter(out_dir)
    config_echo = cfg.to_dict()
    writer.write_config_echo(config_echo)

    start = None
    if resume:
        start, saved_config = load_snapshot(resume)
        if saved_config and saved_config != config_echo:
            logger.warning("Snapshot %s was written under a different config; using the current one", resume)

    evaluator = RetrievalEvaluator(dataset, cfg.map_topn, cfg.train_from_database)
    per_round = functools.partial(evaluate_model, dataset=dataset, top_n=cfg.map_topn,
                                  train_from_database=cfg.train_from_database)
    result = run_federation(cfg, dataset, evaluate=per_round, jobs=cfg.jobs,
                            snapshot_dir=Path(out_dir) / 'snapshots', config_echo=config_echo,
                            start=start)

    final_report = evaluator.full_report(result.state.head, cfg.pr_topn)
    writer.write_rounds_csv(result.history)
    writer.write_metrics(config_echo, result.history, final_report)
    if export_codes:
        train_idx, _, _ = split_indices(dataset)
        owned = [train_idx[p] for p in result.partitions]
        writer.write_codes_csv(evaluator.silo_databases(result.state.head, owned))
    logger.info("Final mAP %.4f; results in %s", final_report['map'], out_dir)
    return final_report


def cmd_run(args) -> int:
    cfg = build_config(args)
    execute_run(cfg, cfg.output_dir, resume=args.resume, export_codes=args.export_codes)
    return EXIT_OK


def _parse_value(raw: str):
    raw = raw.strip()
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


def cmd_sweep(args) -> int:
    """
    One run per value in its own subdirectory, plus comparison.csv.

    Every value is validated before anything runs. A failing run is marked
    in the comparison table and the sweep moves on.
    """
    base = build_config(args)
    key = SWEEP_AXES[args.axis]
    values = [v for v in args.values.split(',') if v.strip()]
    if not values:
        raise UsageError("--values needs at least one value")
    configs = []
    for raw in values:
        cfg = base.with_overrides(**{key: _parse_value(raw)})
        configs.append((raw.strip(), cfg))

    out_root = Path(base.output_dir)
    dataset = load_dataset(base)
    rows = []
    for i, (value, cfg) in enumerate(configs, start=1):
        logger.info("Sweep %s [%d/%d]: %s", args.axis, i, len(configs), value)
        row = {'axis': args.axis, 'value': value}
        try:
            report = execute_run(cfg, out_root / f"{args.axis}_{value}", dataset=dataset)
            row.update(status='ok', final_map=report['map'])
        except FedHapError as e:
            logger.error("Sweep value %s failed: %s", value, e)
            row.update(status='failed', error=str(e))
        rows.append(row)
    ReportWriter(out_root).write_comparison_csv(rows)
    return EXIT_OK if all(r['status'] == 'ok' for r in rows) else EXIT_RUNTIME


def cmd_gen_data(args) -> int:
    spec_data = {}
    if args.spec:
        try:
            with open(args.spec, 'r', encoding='utf-8') as f:
                spec_data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"Cannot read synthetic spec {args.spec}: {e}") from e
    spec = SyntheticSpec.from_dict(spec_data)
    dataset = generate_synthetic(spec)
    save_csv(dataset, args.out)
    logger.info("Wrote %d samples (%d classes, d=%d) to %s",
                dataset.size, dataset.num_classes, dataset.dim, args.out)
    return EXIT_OK


COMMANDS = {
    'run': cmd_run,
    'sweep': cmd_sweep,
    'gen-data': cmd_gen_data,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = parse_arguments(argv)
    setup_logging('debug' if args.verbose else None)
    start_time = time.time()

    try:
        code = COMMANDS[args.command](args)
    except TrainingAborted as e:
        logger.error("Training aborted: %s", e)
        if e.snapshot_path:
            logger.error("Diagnostic snapshot: %s", e.snapshot_path)
        return EXIT_ABORTED
    except (ConfigurationError, UsageError) as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except FedHapError as e:
        logger.error("Error: %s", e)
        return EXIT_RUNTIME
    except OSError as e:
        logger.error("I/O error: %s", e)
        return EXIT_RUNTIME

    logger.info("Done in %.1fs", time.time() - start_time)
    return code


if __name__ == '__main__':
    sys.exit(main())
