"""
Sequence forecaster over windows of region-month embeddings.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import torch
from torch import nn

from .config import config_from_dict, config_to_dict
from .data.normalize import NormStats
from .features import LabelExpander, RawFeatureHead, ReductionHead, concat_parts
from .types import (
    EMBEDDING_DIM,
    HORIZON,
    TARGETS,
    Architecture,
    ExperimentConfig,
    Modality,
    ShapeError,
)


logger = logging.getLogger(__name__)


class Forecaster(nn.Module):
    """Encoders per modality, a label expander and a shared sequence model.

    Every region is an independent sequence through the same weights; the
    readout maps the last hidden state to HORIZON x 3 values.
    """

    def __init__(self, config: ExperimentConfig, feature_widths: Optional[Mapping[Modality, int]] = None):
        super().__init__()
        self.config = config
        self.architecture = config.architecture
        self.input_dim = config.input_dim
        self.window_size = config.window_size
        widths = dict(feature_widths or {})
        self.feature_widths: Dict[Modality, int] = {}

        self.encoders = nn.ModuleDict()
        for modality in config.active_modalities:
            width = widths.get(modality, EMBEDDING_DIM)
            out_dim = config.dims.for_modality(modality)
            if config.use_llm_embedding:
                self.encoders[modality.value] = ReductionHead(out_dim, in_dim=width)
            else:
                self.encoders[modality.value] = RawFeatureHead(width, out_dim)
            self.feature_widths[modality] = width
        self.label_expander = LabelExpander(config.dims.label)

        settings = config.model
        hidden = settings.hidden_size
        if self.architecture is Architecture.RNN:
            self.encoder = nn.RNN(self.input_dim, hidden, settings.num_layers, batch_first=True,
                                  dropout=settings.dropout if settings.num_layers > 1 else 0.0)
        elif self.architecture is Architecture.LSTM:
            self.encoder = nn.LSTM(self.input_dim, hidden, settings.num_layers, batch_first=True,
                                   dropout=settings.dropout if settings.num_layers > 1 else 0.0)
        else:
            self.input_proj = nn.Linear(self.input_dim, hidden)
            self.positional = nn.Parameter(torch.zeros(self.window_size, hidden))
            nn.init.normal_(self.positional, std=0.02)
            layer = nn.TransformerEncoderLayer(
                hidden, settings.num_heads, settings.ff_size, dropout=settings.dropout, batch_first=True
            )
            self.encoder = nn.TransformerEncoder(layer, settings.num_layers, enable_nested_tensor=False)
        self.readout = nn.Linear(hidden, HORIZON * len(TARGETS))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def embed_panel(self, features: Mapping[Modality, torch.Tensor], label_history: torch.Tensor) -> torch.Tensor:
        """(months, regions, D) region-month embeddings from raw per-modality inputs."""
        parts = {m: self.encoders[m.value](features[m]) for m in self.config.active_modalities if m in features}
        return concat_parts(parts, self.label_expander(label_history), self.config)

    def forward(self, inputs: torch.Tensor) -> torch.Tensor:
        """(window, N, D) -> (3, N, 3), or (B, window, N, D) -> (B, 3, N, 3)."""
        single = inputs.dim() == 3
        if single:
            inputs = inputs.unsqueeze(0)
        if inputs.dim() != 4 or inputs.shape[-1] != self.input_dim:
            raise ShapeError(
                f"expected (window, N, {self.input_dim}) or (B, window, N, {self.input_dim}), got {tuple(inputs.shape)}"
            )
        batch, window, regions, width = inputs.shape
        if window < 1:
            raise ShapeError("window must contain at least one month")
        sequences = inputs.permute(0, 2, 1, 3).reshape(batch * regions, window, width)

        if self.architecture is Architecture.TRANSFORMER:
            if window > self.positional.shape[0]:
                raise ShapeError(f"window {window} exceeds the {self.positional.shape[0]} learned positions")
            hidden = self.input_proj(sequences) + self.positional[:window]
            hidden = self.encoder(hidden)
        else:
            hidden, _ = self.encoder(sequences)
        last = hidden[:, -1, :]

        out = self.readout(last).view(batch, regions, HORIZON, len(TARGETS)).permute(0, 2, 1, 3)
        return out[0] if single else out


@dataclass
class LossBreakdown:
    """Per-target MSE components and their weighted total."""
    components: torch.Tensor
    weights: Tuple[float, float, float]
    total: torch.Tensor

    @property
    def l_reservation_days(self) -> float:
        return float(self.components[0])

    @property
    def l_revenue(self) -> float:
        return float(self.components[1])

    @property
    def l_num_reservations(self) -> float:
        return float(self.components[2])

    def as_dict(self) -> Dict[str, float]:
        values = {f"loss_{name}": float(v) for name, v in zip(TARGETS, self.components.detach())}
        values["loss_total"] = float(self.total.detach())
        return values


def compute_loss(predictions: torch.Tensor, targets: torch.Tensor,
                 weights: Tuple[float, float, float] = (1.0, 1.0, 1.0)) -> LossBreakdown:
    """Weighted sum of per-target mean squared errors.

    The last axis indexes the three targets; every other axis is averaged.
    """
    if predictions.shape != targets.shape or predictions.shape[-1] != len(TARGETS):
        raise ShapeError(f"predictions {tuple(predictions.shape)} vs targets {tuple(targets.shape)}")
    squared = (predictions - targets) ** 2
    components = squared.reshape(-1, len(TARGETS)).mean(dim=0)
    alpha, beta, gamma = (float(w) for w in weights)
    total = alpha * components[0] + beta * components[1] + gamma * components[2]
    return LossBreakdown(components, (alpha, beta, gamma), total)


@dataclass
class Checkpoint:
    config: ExperimentConfig
    model: Forecaster
    stats: Optional[NormStats] = None
    epoch: int = 0
    best_val_total: float = float("inf")
    extra: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(checkpoint: Checkpoint, path: Union[str, Path]) -> Path:
    """Config echo, named parameter tensors with shapes, and label statistics in one file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    state = checkpoint.model.state_dict()
    torch.save(
        {
            "config": config_to_dict(checkpoint.config),
            "feature_widths": {m.value: w for m, w in checkpoint.model.feature_widths.items()},
            "state_dict": state,
            "shapes": {name: list(t.shape) for name, t in state.items()},
            "norm_stats": checkpoint.stats.to_dict() if checkpoint.stats else None,
            "epoch": checkpoint.epoch,
            "best_val_total": checkpoint.best_val_total,
            "extra": checkpoint.extra,
        },
        path,
    )
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    data = torch.load(Path(path), map_location="cpu", weights_only=False)
    config = config_from_dict(data["config"])
    widths = {Modality(k): int(v) for k, v in data["feature_widths"].items()}
    model = Forecaster(config, widths)
    model.load_state_dict(data["state_dict"])
    stats = NormStats.from_dict(data["norm_stats"]) if data.get("norm_stats") else None
    return Checkpoint(config, model, stats, int(data["epoch"]), float(data["best_val_total"]), data.get("extra") or {})
