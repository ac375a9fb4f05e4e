"""
Command-line entry point: strtrend <subcommand> [options].
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import yaml

from .backends import create_backend
from .config import apply_env, apply_overrides, default_config, dump_config, load_config
from .data.ingest import load_panel
from .data.schema import SchemaMapping
from .data.synthetic import SyntheticSpec, generate_synthetic
from .embedder import PromptEmbedder
from .events import PipelineEventEmitter
from .experiments import (
    collect_tables,
    emit_report,
    run_cell,
    run_llm_ablation,
    run_main_comparison,
    run_modality_ablation,
    run_dim_sweep,
    run_window_sweep,
)
from .features import window_sets, window_starts
from .model import load_checkpoint
from .pipeline import prepare_dataset, to_panel_tensors
from .prompts import dump_prompts
from .training import evaluate
from .types import EMBEDDING_DIM, MODALITY_ORDER, ExperimentConfig, StrTrendError, WindowingError
from .utils.cache import EmbeddingCache


logger = logging.getLogger("strtrend")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config value (repeatable)")
    parser.add_argument("--data", help="directory holding the four input tables (overrides data.path)")
    parser.add_argument("--schema", help="YAML column mapping (overrides data.schema)")
    parser.add_argument("--out", default="runs", help="output directory")
    parser.add_argument("--dry-run", action="store_true", help="validate config and data, then stop")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strtrend", description="Regional short-term-rental trend forecasting")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="write a synthetic dataset")
    synth.add_argument("--regions", type=int, default=20)
    synth.add_argument("--months", type=int, default=36)
    synth.add_argument("--seed", type=int, default=43)
    synth.add_argument("--noise", type=float, default=SyntheticSpec.noise_scale, help="label noise scale")
    synth.add_argument("--start", default=SyntheticSpec.start_month, help="first month, YYYY-MM")
    synth.add_argument("--out", default="data")
    synth.add_argument("--verbose", "-v", action="store_true")

    for name, text in (
        ("ingest", "load the tables and select active regions"),
        ("prompt", "render every region-month prompt to text files"),
        ("embed", "embed every prompt into the cache"),
        ("train", "train and test one configuration"),
    ):
        _common(sub.add_parser(name, help=text))

    ev = sub.add_parser("evaluate", help="evaluate a checkpoint on the test split")
    _common(ev)
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--raw", action="store_true", help="metrics in raw label space")

    ablate = sub.add_parser("ablate", help="run an ablation grid")
    _common(ablate)
    ablate.add_argument("--grid", choices=("modalities", "llm", "main"), default="modalities")

    sweep = sub.add_parser("sweep", help="run the embedding-dimension and window-size grids")
    _common(sweep)
    sweep.add_argument("--grid", choices=("dims", "window", "all"), default="all")

    report = sub.add_parser("report", help="tabulate finished run directories")
    report.add_argument("--runs", required=True, help="directory written by ablate or sweep")
    report.add_argument("--out", default="report")
    report.add_argument("--verbose", "-v", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file (or defaults), then --set overrides, then CLI paths and environment."""
    if args.config:
        config = load_config(args.config, args.overrides)
    else:
        config = apply_env(apply_overrides(default_config(), args.overrides))
    data = config.data
    if args.data:
        data = dataclasses.replace(data, path=args.data)
    if args.schema:
        data = dataclasses.replace(data, schema=args.schema)
    config = dataclasses.replace(config, data=data)
    config.validate()
    logger.info("resolved config:\n%s", dump_config(config))
    return config


def _load(config: ExperimentConfig):
    return load_panel(config.data.path, SchemaMapping.from_yaml(config.data.schema))


def _embedder(config: ExperimentConfig, events: Optional[PipelineEventEmitter] = None) -> PromptEmbedder:
    backend = create_backend(config.backend)
    cache = EmbeddingCache(config.backend.cache_dir, EMBEDDING_DIM)
    return PromptEmbedder(backend, cache, events)


def _dataset(config: ExperimentConfig, events: Optional[PipelineEventEmitter] = None):
    return prepare_dataset(_load(config), config, _embedder(config, events))


def _dry_run(config: ExperimentConfig) -> int:
    dataset = prepare_dataset(_load(config), config)
    windows = {k: len(v) for k, v in window_starts(dataset.panel.n_months, config.window_size,
                                                   config.horizon, dataset.split).items()}
    if not any(windows.values()):
        raise WindowingError(f"no window of {config.window_size} + {config.horizon} months fits the data")
    logger.info("dry run: %d regions, %d months, windows %s", len(dataset.regions), dataset.panel.n_months, windows)
    print(f"ok: {len(dataset.regions)} regions, windows {windows}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(start_month=args.start, noise_scale=args.noise)
    paths = generate_synthetic(args.regions, args.months, args.seed, args.out, spec)
    for path in paths.as_dict().values():
        print(path)
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.dry_run:
        return _dry_run(config)
    dataset = prepare_dataset(_load(config), config)
    summary = {
        "months": dataset.panel.months[0] + ".." + dataset.panel.months[-1],
        "n_months": dataset.panel.n_months,
        "regions": dataset.regions,
        "threshold": dataset.selection.threshold if dataset.selection else None,
        "total_regions": dataset.selection.total if dataset.selection else len(dataset.regions),
        "label_stats": dataset.stats.to_dict(),
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ingest.yaml").write_text(yaml.safe_dump(summary, sort_keys=False), encoding="utf-8")
    print(f"selected {len(dataset.regions)} of {summary['total_regions']} regions -> {out / 'ingest.yaml'}")
    return 0


def cmd_prompt(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.dry_run:
        return _dry_run(config)
    dataset = prepare_dataset(_load(config), config)
    count = dump_prompts(dataset.panel, args.out)
    print(f"wrote {count} prompts to {args.out}")
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.dry_run:
        return _dry_run(config)
    events = PipelineEventEmitter()
    counts = {"cache_hit": 0, "cache_miss": 0}
    for event in counts:
        events.on(event, lambda key, _e=event: counts.__setitem__(_e, counts[_e] + 1))
    dataset = _dataset(config, events)
    for modality in MODALITY_ORDER:
        dataset.embeddings(modality)
    print(f"embedded prompts: {counts['cache_miss']} new, {counts['cache_hit']} cached")
    return 0


def _print_metrics(name: str, row: dict) -> None:
    cells = "  ".join(f"{k}={v:.4f}" for k, v in row.items() if isinstance(v, float))
    print(f"{name}: {cells}")


def cmd_train(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.dry_run:
        return _dry_run(config)
    result = run_cell(_dataset(config), config, "train", args.out)
    _print_metrics(result.variant, result.metrics.as_row())
    print(f"run directory: {result.run_dir}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    checkpoint = load_checkpoint(args.checkpoint)
    replay = dataclasses.replace(checkpoint.config, data=config.data, backend=config.backend)
    if args.dry_run:
        return _dry_run(replay)
    dataset = _dataset(replay)
    panel = to_panel_tensors(dataset, replay)
    windows = window_sets(panel, replay, dataset.split)
    if checkpoint.stats is None:
        checkpoint.stats = dataset.stats
    report = evaluate(checkpoint, windows["test"], raw=args.raw)
    _print_metrics(f"test ({report.space.value})", report.as_row())
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.dry_run:
        return _dry_run(config)
    dataset = _dataset(config)
    runner = {"modalities": run_modality_ablation, "llm": run_llm_ablation, "main": run_main_comparison}[args.grid]
    table = runner(dataset, config, args.out)
    emit_report([table], args.out)
    for row in table.rows:
        _print_metrics(row["variant"], row)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.dry_run:
        return _dry_run(config)
    dataset = _dataset(config)
    tables = []
    if args.grid in ("dims", "all"):
        tables.append(run_dim_sweep(dataset, config, args.out))
    if args.grid in ("window", "all"):
        tables.append(run_window_sweep(dataset, config, args.out))
    emit_report(tables, args.out)
    for table in tables:
        for row in table.rows:
            _print_metrics(f"{table.name}/{row['variant']}", row)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    tables = collect_tables(args.runs)
    out = emit_report(tables, args.out)
    print(f"report: {out / 'summary.md'}")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "prompt": cmd_prompt,
    "embed": cmd_embed,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def dispatch(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename or e}", file=sys.stderr)
        return 1
    except StrTrendError as e:
        print(f"error: {e.__class__.__name__}: {e}", file=sys.stderr)
        return 1


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
