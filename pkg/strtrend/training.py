"""
Training loop, early stopping and forecast metrics.
"""

import copy
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import torch

from .data.normalize import NormStats, denormalize_labels
from .events import PipelineEventEmitter
from .features import WindowSet, gather_windows
from .model import Checkpoint, Forecaster, compute_loss
from .types import TARGETS, ExperimentConfig, MetricSpace, TrainingError, WindowingError


logger = logging.getLogger(__name__)


def seed_everything(seed: int) -> None:
    """Seed python, numpy and torch and request deterministic kernels."""
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


@dataclass
class TrainState:
    epoch: int = 0
    best_val_total: float = math.inf
    best_epoch: int = 0
    bad_epochs: int = 0
    seed: int = 0
    history: List[Dict[str, float]] = field(default_factory=list)


def predict(model: Forecaster, windows: WindowSet, config: ExperimentConfig) -> torch.Tensor:
    """(samples, 3, N, 3) forecasts for every window of the set."""
    panel = windows.panel
    embeddings = model.embed_panel(panel.features, panel.label_history(config.label_lag))
    return model(gather_windows(embeddings, windows.starts, windows.window_size))


def train(model: Forecaster, train_set: WindowSet, val_set: WindowSet, config: ExperimentConfig,
          stats: Optional[NormStats] = None, events: Optional[PipelineEventEmitter] = None) -> Tuple[Checkpoint, TrainState]:
    """Full-batch Adam on the weighted loss with early stopping on validation total.

    The returned checkpoint holds the parameters of the best validation epoch.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise WindowingError(f"training needs train and val windows, got {len(train_set)} and {len(val_set)}")
    events = events or PipelineEventEmitter()
    settings = config.train
    optimizer = torch.optim.Adam(model.parameters(), lr=settings.learning_rate)
    state = TrainState(seed=config.seed)
    best_params = copy.deepcopy(model.state_dict())
    train_targets = train_set.targets()
    val_targets = val_set.targets()
    logger.info(
        "training %s with %d parameters on %d/%d windows",
        config.architecture.value, model.parameter_count(), len(train_set), len(val_set),
    )

    for epoch in range(1, settings.max_epochs + 1):
        state.epoch = epoch
        model.train()
        optimizer.zero_grad()
        loss = compute_loss(predict(model, train_set, config), train_targets, config.loss_weights)
        if not torch.isfinite(loss.total):
            raise TrainingError("non-finite training loss", epoch, 0, loss.as_dict())
        loss.total.backward()
        optimizer.step()

        model.eval()
        with torch.no_grad():
            val_loss = compute_loss(predict(model, val_set, config), val_targets, config.loss_weights)
        val_total = float(val_loss.total)
        if not math.isfinite(val_total):
            raise TrainingError("non-finite validation loss", epoch, 0, val_loss.as_dict())

        record = {"epoch": epoch, "train_total": float(loss.total.detach()), "val_total": val_total}
        record.update({f"train_{k}": v for k, v in loss.as_dict().items() if k != "loss_total"})
        state.history.append(record)
        events.emit("epoch_end", record)

        if val_total < state.best_val_total:
            state.best_val_total = val_total
            state.best_epoch = epoch
            state.bad_epochs = 0
            best_params = copy.deepcopy(model.state_dict())
            events.emit("checkpoint", epoch, val_total)
        else:
            state.bad_epochs += 1
            if state.bad_epochs >= settings.patience:
                logger.info("early stop at epoch %d (best %d, val %.6f)", epoch, state.best_epoch, state.best_val_total)
                events.emit("early_stop", epoch, state.best_epoch)
                break

    model.load_state_dict(best_params)
    model.eval()
    checkpoint = Checkpoint(config, model, stats, state.best_epoch, state.best_val_total)
    return checkpoint, state


@dataclass(frozen=True)
class MetricReport:
    """RMSE and MAE per target, their unweighted means, and per-horizon totals."""
    rmse: Dict[str, float]
    mae: Dict[str, float]
    total_rmse: float
    total_mae: float
    horizon_rmse: Tuple[float, ...]
    horizon_mae: Tuple[float, ...]
    space: MetricSpace = MetricSpace.NORMALIZED
    n_samples: int = 0

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {}
        for name in TARGETS:
            row[f"{name}_rmse"] = self.rmse[name]
            row[f"{name}_mae"] = self.mae[name]
        row["total_rmse"] = self.total_rmse
        row["total_mae"] = self.total_mae
        return row


def total_of(per_target) -> float:
    """Unweighted mean of the three per-target metrics."""
    return float(np.mean(list(per_target)))


def compute_metrics(predictions: np.ndarray, targets: np.ndarray,
                    space: MetricSpace = MetricSpace.NORMALIZED) -> MetricReport:
    """Metrics over arrays whose last axis is the target and whose third-last axis is the horizon.

    Accepts (samples, horizon, regions, 3); (horizon, regions, 3) is one sample.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ValueError(f"shape mismatch {predictions.shape} vs {targets.shape}")
    if predictions.ndim == 3:
        predictions, targets = predictions[None], targets[None]
    errors = predictions - targets
    flat = errors.reshape(-1, errors.shape[-1])
    rmse = np.sqrt(np.mean(flat ** 2, axis=0))
    mae = np.mean(np.abs(flat), axis=0)

    horizon_rmse, horizon_mae = [], []
    for h in range(errors.shape[1]):
        step = errors[:, h].reshape(-1, errors.shape[-1])
        horizon_rmse.append(total_of(np.sqrt(np.mean(step ** 2, axis=0))))
        horizon_mae.append(total_of(np.mean(np.abs(step), axis=0)))

    return MetricReport(
        rmse={name: float(v) for name, v in zip(TARGETS, rmse)},
        mae={name: float(v) for name, v in zip(TARGETS, mae)},
        total_rmse=total_of(rmse),
        total_mae=total_of(mae),
        horizon_rmse=tuple(horizon_rmse),
        horizon_mae=tuple(horizon_mae),
        space=space,
        n_samples=int(errors.shape[0]),
    )


def evaluate(checkpoint: Checkpoint, samples: WindowSet, raw: bool = False) -> MetricReport:
    """Metrics of the checkpoint's forecasts; `raw` inverts the label transform first."""
    if len(samples) == 0:
        raise WindowingError("cannot evaluate an empty window set")
    model = checkpoint.model
    model.eval()
    with torch.no_grad():
        predictions = predict(model, samples, checkpoint.config).cpu().numpy()
    targets = samples.targets().cpu().numpy()
    if raw:
        if checkpoint.stats is None:
            raise ValueError("raw-space metrics need the label statistics stored with the checkpoint")
        predictions = denormalize_labels(predictions, checkpoint.stats)
        targets = denormalize_labels(targets, checkpoint.stats)
        return compute_metrics(predictions, targets, MetricSpace.RAW)
    return compute_metrics(predictions, targets)
