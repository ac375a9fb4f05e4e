"""
Experiment grids: baseline comparison, modality and embedding ablations, sweeps and reports.
"""

import dataclasses
import logging
import re
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from .config import config_diff, modality_names, save_config  # noqa: E402
from .events import PipelineEventEmitter  # noqa: E402
from .features import window_sets  # noqa: E402
from .model import Forecaster, save_checkpoint  # noqa: E402
from .pipeline import ForecastDataset, to_panel_tensors  # noqa: E402
from .training import MetricReport, evaluate, seed_everything, train  # noqa: E402
from .types import (  # noqa: E402
    MODALITY_ORDER,
    Architecture,
    ConfigurationError,
    EmbeddingDims,
    ExperimentConfig,
    Modality,
    ReportError,
)


logger = logging.getLogger(__name__)

DIM_OPTIONS: Tuple[Tuple[str, EmbeddingDims], ...] = (
    ("D_opt1", EmbeddingDims(48, 48, 64, 4)),
    ("D_opt2", EmbeddingDims(48, 48, 128, 4)),
    ("D_opt3", EmbeddingDims(48, 64, 128, 4)),
    ("D_opt4", EmbeddingDims(64, 48, 128, 4)),
)
WINDOW_OPTIONS: Tuple[int, ...] = (3, 6, 9, 12)
BASELINE_AIRBNB_DIM = 128
ARCHITECTURE_TITLES = {
    Architecture.RNN: "RNN",
    Architecture.LSTM: "LSTM",
    Architecture.TRANSFORMER: "Transformer",
}
METRIC_COLUMNS = (
    "reservation_days_rmse", "reservation_days_mae",
    "revenue_rmse", "revenue_mae",
    "num_reservations_rmse", "num_reservations_mae",
    "total_rmse", "total_mae",
)


def modality_subsets() -> List[frozenset]:
    """The seven non-empty modality subsets: singles, then pairs, then all three."""
    subsets = []
    for size in (1, 2, 3):
        subsets += [frozenset(c) for c in combinations(MODALITY_ORDER, size)]
    return subsets


@dataclass
class ExperimentGrid:
    """Named variants of one base config that differ only along `axes`.

    Axes are dotted config keys (e.g. "dims.airbnb"); every variant runs
    `repetitions` times with seeds seed, seed + 1, ...
    """
    name: str
    base: ExperimentConfig
    variants: List[Tuple[str, ExperimentConfig]]
    axes: Tuple[str, ...]
    repetitions: int = 1

    def validate(self) -> None:
        if not self.variants:
            raise ConfigurationError(f"grid {self.name} has no variants")
        names = [v for v, _ in self.variants]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"grid {self.name} has duplicate variant ids")
        for variant, config in self.variants:
            config.validate()
            stray = set(config_diff(self.base, config)) - set(self.axes)
            if stray:
                raise ConfigurationError(f"variant {variant} of {self.name} also changes {sorted(stray)}")


@dataclass
class RunResult:
    variant: str
    config: ExperimentConfig
    metrics: MetricReport
    best_val_total: float
    history: List[Dict[str, float]]
    run_dir: Optional[Path] = None


@dataclass
class ResultTable:
    """One row per variant; the best row has the lowest Total RMSE."""
    name: str
    rows: List[Dict[str, Any]] = field(default_factory=list)
    runs: List[RunResult] = field(default_factory=list)

    @property
    def best_index(self) -> int:
        if not self.rows:
            raise ReportError(f"table {self.name} is empty")
        order = range(len(self.rows))
        return min(order, key=lambda i: (self.rows[i]["total_rmse"], self.rows[i]["total_mae"], i))

    @property
    def best(self) -> Dict[str, Any]:
        return self.rows[self.best_index]

    def variants(self) -> List[str]:
        return [row["variant"] for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.rows)
        frame["best"] = [i == self.best_index for i in range(len(self.rows))]
        return frame

    def row(self, variant: str) -> Dict[str, Any]:
        for row in self.rows:
            if row["variant"] == variant:
                return row
        raise KeyError(variant)


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_") or "run"


def run_cell(dataset: ForecastDataset, config: ExperimentConfig, variant: str = "run",
             out_dir: Optional[Union[str, Path]] = None,
             events: Optional[PipelineEventEmitter] = None) -> RunResult:
    """Train and test one configuration; writes a replayable run directory when `out_dir` is set."""
    config.validate()
    seed_everything(config.seed)
    panel = to_panel_tensors(dataset, config)
    windows = window_sets(panel, config, dataset.split)
    model = Forecaster(config, panel.feature_widths())
    checkpoint, state = train(model, windows["train"], windows["val"], config, dataset.stats, events)
    checkpoint.extra["variant"] = variant
    metrics = evaluate(checkpoint, windows["test"])
    logger.info("%s: test total RMSE %.4f MAE %.4f", variant, metrics.total_rmse, metrics.total_mae)

    run_dir = None
    if out_dir is not None:
        run_dir = Path(out_dir) / _slug(variant)
        run_dir.mkdir(parents=True, exist_ok=True)
        save_config(config, run_dir / "config.yaml")
        pd.DataFrame(state.history).to_csv(run_dir / "epochs.csv", index=False, float_format="%.8f")
        save_checkpoint(checkpoint, run_dir / "checkpoint.pt")
        pd.DataFrame([{"variant": variant, **metrics.as_row()}]).to_csv(
            run_dir / "metrics.csv", index=False, float_format="%.6f"
        )
        horizons = pd.DataFrame({
            "horizon": range(1, len(metrics.horizon_rmse) + 1),
            "rmse": metrics.horizon_rmse,
            "mae": metrics.horizon_mae,
        })
        horizons.to_csv(run_dir / "horizons.csv", index=False, float_format="%.6f")
    return RunResult(variant, config, metrics, state.best_val_total, state.history, run_dir)


def _aggregate(variant: str, runs: List[RunResult]) -> Dict[str, Any]:
    rows = [r.metrics.as_row() for r in runs]
    row: Dict[str, Any] = {"variant": variant}
    for column in METRIC_COLUMNS:
        values = np.array([r[column] for r in rows])
        row[column] = float(values.mean())
        if len(runs) > 1:
            row[f"{column}_std"] = float(values.std())
    return row


def run_grid(dataset: ForecastDataset, grid: ExperimentGrid, out_dir: Optional[Union[str, Path]] = None,
             events: Optional[PipelineEventEmitter] = None) -> ResultTable:
    """Run every variant of a grid, sequentially, and tabulate test metrics."""
    grid.validate()
    events = events or PipelineEventEmitter()
    table = ResultTable(grid.name)
    grid_dir = Path(out_dir) / grid.name if out_dir is not None else None
    for variant, config in grid.variants:
        runs = []
        for rep in range(grid.repetitions):
            cell = dataclasses.replace(config, seed=config.seed + rep)
            name = variant if grid.repetitions == 1 else f"{variant}/seed{cell.seed}"
            result = run_cell(dataset, cell, name, grid_dir, events)
            runs.append(result)
            events.emit("cell_done", grid.name, name, result.metrics)
        table.rows.append(_aggregate(variant, runs))
        table.runs.extend(runs)
    return table


def baseline_config(base: ExperimentConfig, architecture: Architecture) -> ExperimentConfig:
    """Raw Airbnb features projected to 128 dims plus label history."""
    return dataclasses.replace(
        base,
        architecture=architecture,
        modalities=frozenset({Modality.AIRBNB}),
        use_llm_embedding=False,
        dims=dataclasses.replace(base.dims, airbnb=BASELINE_AIRBNB_DIM),
    )


def run_baseline(dataset: ForecastDataset, architecture: Architecture,
                 base: Optional[ExperimentConfig] = None,
                 out_dir: Optional[Union[str, Path]] = None) -> MetricReport:
    config = baseline_config(base or ExperimentConfig(), architecture)
    name = f"{ARCHITECTURE_TITLES[architecture]} Baseline"
    return run_cell(dataset, config, name, out_dir).metrics


def run_main_comparison(dataset: ForecastDataset, base: ExperimentConfig,
                        out_dir: Optional[Union[str, Path]] = None,
                        events: Optional[PipelineEventEmitter] = None) -> ResultTable:
    """Baseline and full model for every architecture (six rows)."""
    variants = []
    for architecture in Architecture:
        variants.append((f"{ARCHITECTURE_TITLES[architecture]} Baseline", baseline_config(base, architecture)))
    for architecture in Architecture:
        ours = dataclasses.replace(base, architecture=architecture, use_llm_embedding=True,
                                   modalities=frozenset(MODALITY_ORDER))
        variants.append((f"{ARCHITECTURE_TITLES[architecture]} Ours", ours))
    grid = ExperimentGrid(
        "main", base, variants,
        axes=("model.architecture", "experiment.modalities", "experiment.use_llm_embedding", "dims.airbnb"),
        repetitions=base.repetitions,
    )
    return run_grid(dataset, grid, out_dir, events)


def error_reduction(table: ResultTable) -> Dict[str, Tuple[float, float]]:
    """Relative Total RMSE / MAE reduction of each "Ours" row against its baseline."""
    reductions = {}
    for title in ARCHITECTURE_TITLES.values():
        try:
            baseline = table.row(f"{title} Baseline")
            ours = table.row(f"{title} Ours")
        except KeyError:
            continue
        reductions[title] = (
            (baseline["total_rmse"] - ours["total_rmse"]) / baseline["total_rmse"],
            (baseline["total_mae"] - ours["total_mae"]) / baseline["total_mae"],
        )
    return reductions


def run_modality_ablation(dataset: ForecastDataset, base: ExperimentConfig,
                          out_dir: Optional[Union[str, Path]] = None,
                          events: Optional[PipelineEventEmitter] = None) -> ResultTable:
    """LSTM over every non-empty modality subset, each with the label embedding."""
    base = dataclasses.replace(base, architecture=Architecture.LSTM, use_llm_embedding=True)
    variants = [(modality_names(s), dataclasses.replace(base, modalities=s)) for s in modality_subsets()]
    grid = ExperimentGrid("modalities", base, variants, axes=("experiment.modalities",),
                          repetitions=base.repetitions)
    return run_grid(dataset, grid, out_dir, events)


def run_llm_ablation(dataset: ForecastDataset, base: ExperimentConfig,
                     out_dir: Optional[Union[str, Path]] = None,
                     events: Optional[PipelineEventEmitter] = None) -> ResultTable:
    """Same modalities with raw tabular features versus prompt embeddings."""
    variants = [
        ("w/o LLM embedding", dataclasses.replace(base, use_llm_embedding=False)),
        ("Ours", dataclasses.replace(base, use_llm_embedding=True)),
    ]
    grid = ExperimentGrid("llm", base, variants, axes=("experiment.use_llm_embedding",),
                          repetitions=base.repetitions)
    return run_grid(dataset, grid, out_dir, events)


def run_dim_sweep(dataset: ForecastDataset, base: ExperimentConfig,
                  out_dir: Optional[Union[str, Path]] = None,
                  events: Optional[PipelineEventEmitter] = None) -> ResultTable:
    """The four embedding-dimension options, retraining every cell."""
    grid = ExperimentGrid(
        "dims", base,
        [(name, dataclasses.replace(base, dims=d)) for name, d in DIM_OPTIONS],
        axes=("dims.accessibility", "dims.human_flow", "dims.airbnb", "dims.label"),
        repetitions=base.repetitions,
    )
    return run_grid(dataset, grid, out_dir, events)


def run_window_sweep(dataset: ForecastDataset, base: ExperimentConfig,
                     out_dir: Optional[Union[str, Path]] = None,
                     events: Optional[PipelineEventEmitter] = None,
                     windows: Sequence[int] = WINDOW_OPTIONS) -> ResultTable:
    grid = ExperimentGrid(
        "window", base,
        [(f"{w} months", dataclasses.replace(base, window_size=w)) for w in windows],
        axes=("experiment.window_size",),
        repetitions=base.repetitions,
    )
    return run_grid(dataset, grid, out_dir, events)


def run_sweeps(dataset: ForecastDataset, base: ExperimentConfig,
               out_dir: Optional[Union[str, Path]] = None,
               events: Optional[PipelineEventEmitter] = None) -> Tuple[ResultTable, ResultTable]:
    """Embedding-dimension grid and window-size grid."""
    return (
        run_dim_sweep(dataset, base, out_dir, events),
        run_window_sweep(dataset, base, out_dir, events),
    )


def _plot_losses(runs: List[RunResult], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for run in runs:
        if run.history:
            epochs = [h["epoch"] for h in run.history]
            ax.plot(epochs, [h["val_total"] for h in run.history], label=run.variant)
    ax.set_xlabel("epoch")
    ax.set_ylabel("validation loss")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _plot_horizons(runs: List[RunResult], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    for run in runs:
        steps = range(1, len(run.metrics.horizon_rmse) + 1)
        ax.plot(list(steps), run.metrics.horizon_rmse, marker="o", label=run.variant)
    ax.set_xlabel("months ahead")
    ax.set_ylabel("total RMSE")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def emit_report(tables: Sequence[ResultTable], out_dir: Union[str, Path], plots: bool = True) -> Path:
    """Write one CSV per table, summary.md, and loss / per-horizon plots."""
    tables = [t for t in tables if t.rows]
    if not tables:
        raise ReportError("no completed runs to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["# Results", ""]
    for table in tables:
        frame = table.to_frame()
        frame.to_csv(out / f"{table.name}.csv", index=False, float_format="%.4f", lineterminator="\n")
        lines += [f"## {table.name}", "", "| variant | Total RMSE | Total MAE |", "|---|---|---|"]
        for i, row in enumerate(table.rows):
            mark = " **(best)**" if i == table.best_index else ""
            lines.append(f"| {row['variant']}{mark} | {row['total_rmse']:.4f} | {row['total_mae']:.4f} |")
        lines.append("")
        if table.name == "main":
            for arch, (rmse, mae) in error_reduction(table).items():
                lines.append(f"- {arch}: RMSE reduced by {100 * rmse:.1f}%, MAE by {100 * mae:.1f}%")
            lines.append("")
        if plots and table.runs:
            _plot_losses(table.runs, out / f"{table.name}_loss.png")
            _plot_horizons(table.runs, out / f"{table.name}_horizon.png")
    (out / "summary.md").write_text("\n".join(lines), encoding="utf-8")
    logger.info("report written to %s", out)
    return out


def collect_tables(root: Union[str, Path]) -> List[ResultTable]:
    """Rebuild result tables from run directories laid out as {root}/{grid}/{variant}/metrics.csv."""
    tables = []
    for grid_dir in sorted(p for p in Path(root).iterdir() if p.is_dir()):
        metric_files = sorted(grid_dir.glob("*/metrics.csv"))
        if not metric_files:
            continue
        frame = pd.concat([pd.read_csv(f) for f in metric_files], ignore_index=True)
        tables.append(ResultTable(grid_dir.name, frame.to_dict(orient="records")))
    return tables
