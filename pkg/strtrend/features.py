"""
Reduction heads, the label expander, region-month assembly and sliding windows.
"""

import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from torch import nn

from .data.normalize import SplitAssignment
from .months import calendar_of
from .types import (
    EMBEDDING_DIM,
    HORIZON,
    AssemblyError,
    ExperimentConfig,
    Modality,
    MonthIndex,
    ShapeError,
    WindowingError,
)


logger = logging.getLogger(__name__)

REDUCTION_WIDTHS: Tuple[int, ...] = (768, 256, 128)
SPLITS = ("train", "val", "test")


class ReductionHead(nn.Module):
    """Fully connected stack 3072 -> 768 -> 256 -> 128 -> out_dim.

    ReLU between layers; the final layer is linear.
    """

    def __init__(self, out_dim: int, in_dim: int = EMBEDDING_DIM, widths: Sequence[int] = REDUCTION_WIDTHS):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        layers: List[nn.Module] = []
        prev = in_dim
        for width in widths:
            layers += [nn.Linear(prev, width), nn.ReLU()]
            prev = width
        layers.append(nn.Linear(prev, out_dim))
        self.net = nn.Sequential(*layers)

    @property
    def final(self) -> nn.Linear:
        return self.net[-1]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"reduction head expects width {self.in_dim}, got {tuple(x.shape)}")
        return self.net(x)


class RawFeatureHead(nn.Module):
    """Single affine projection of tabular features, used when LLM embeddings are off."""

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.proj = nn.Linear(in_dim, out_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[-1] != self.in_dim:
            raise ShapeError(f"feature head expects width {self.in_dim}, got {tuple(x.shape)}")
        return self.proj(x)


class LabelExpander(nn.Module):
    """Affine 3 -> label_dim map over normalised label history."""

    def __init__(self, out_dim: int = 4):
        super().__init__()
        self.out_dim = out_dim
        self.proj = nn.Linear(3, out_dim)

    def forward(self, history: torch.Tensor) -> torch.Tensor:
        if history.shape[-1] != 3:
            raise ShapeError(f"label history must end in 3 targets, got {tuple(history.shape)}")
        return self.proj(history)


def _as_tensor(values, like: nn.Module) -> torch.Tensor:
    param = next(like.parameters())
    if isinstance(values, torch.Tensor):
        return values.to(dtype=param.dtype)
    values = getattr(values, "values", values)
    return torch.as_tensor(np.asarray(values), dtype=param.dtype)


def reduce(embedding, head: ReductionHead) -> torch.Tensor:
    """Apply a reduction head to one embedding (EmbeddingVector, array or tensor)."""
    return head(_as_tensor(embedding, head))


def expand_labels(history, expander: LabelExpander) -> torch.Tensor:
    """Expand a normalised label triple (LabelTriple, array or tensor) to the label width."""
    if hasattr(history, "as_tuple"):
        history = history.as_tuple()
    return expander(_as_tensor(history, expander))


def segment_offsets(config: ExperimentConfig) -> Dict[str, Tuple[int, int]]:
    """[start, stop) of each segment of a region-month embedding, in canonical order."""
    offsets: Dict[str, Tuple[int, int]] = {}
    start = 0
    for modality in config.active_modalities:
        stop = start + config.dims.for_modality(modality)
        offsets[modality.value] = (start, stop)
        start = stop
    offsets["label"] = (start, start + config.dims.label)
    return offsets


def concat_parts(parts: Mapping[Modality, torch.Tensor], label: torch.Tensor,
                 config: ExperimentConfig) -> torch.Tensor:
    """Concatenate reduced parts along the last axis: active modalities, then the label segment."""
    pieces = []
    for modality in config.active_modalities:
        if modality not in parts:
            raise AssemblyError(f"missing {modality.title} part")
        part = parts[modality]
        expected = config.dims.for_modality(modality)
        if part.shape[-1] != expected:
            raise AssemblyError(f"{modality.title} part has width {part.shape[-1]}, expected {expected}")
        pieces.append(part)
    if label.shape[-1] != config.dims.label:
        raise AssemblyError(f"label part has width {label.shape[-1]}, expected {config.dims.label}")
    pieces.append(label)
    return torch.cat(pieces, dim=-1)


@dataclass
class RegionMonthEmbedding:
    vector: torch.Tensor
    region: str
    month: MonthIndex

    def segment(self, name: str, config: ExperimentConfig) -> torch.Tensor:
        start, stop = segment_offsets(config)[name]
        return self.vector[start:stop]


def assemble_region_month(parts: Mapping[Modality, torch.Tensor], label: torch.Tensor,
                          config: ExperimentConfig, region: str = "",
                          month: Optional[MonthIndex] = None) -> RegionMonthEmbedding:
    vector = concat_parts(parts, label, config)
    if vector.dim() != 1 or vector.shape[0] != config.input_dim:
        raise AssemblyError(f"region-month embedding has shape {tuple(vector.shape)}, expected ({config.input_dim},)")
    return RegionMonthEmbedding(vector, region, month or MonthIndex(0, ""))


@dataclass
class PanelTensors:
    """Per-modality model inputs and normalised labels over the whole panel.

    `features[m]` has shape (months, regions, width) where width is 3072 for
    prompt embeddings or the tabular width on the raw-feature path.
    """
    features: Dict[Modality, torch.Tensor]
    labels: torch.Tensor
    regions: List[str]
    months: List[str]

    @property
    def n_months(self) -> int:
        return int(self.labels.shape[0])

    @property
    def n_regions(self) -> int:
        return int(self.labels.shape[1])

    def feature_widths(self) -> Dict[Modality, int]:
        return {m: int(t.shape[-1]) for m, t in self.features.items()}

    def label_history(self, lag: int = 1) -> torch.Tensor:
        """Labels shifted forward by `lag` months; the first `lag` months are zeros."""
        if lag == 0:
            return self.labels
        history = torch.zeros_like(self.labels)
        if lag < self.n_months:
            history[lag:] = self.labels[:-lag]
        return history


@dataclass
class WindowSample:
    inputs: torch.Tensor
    targets: torch.Tensor
    first_target_month: MonthIndex


@dataclass
class WindowSet:
    """Windows over one panel, identified by their first target month."""
    panel: PanelTensors
    starts: torch.Tensor
    window_size: int
    horizon: int = HORIZON

    def __len__(self) -> int:
        return int(self.starts.shape[0])

    def input_index(self) -> torch.Tensor:
        """(samples, window) month indices of the inputs."""
        return self.starts[:, None] - self.window_size + torch.arange(self.window_size)

    def target_index(self) -> torch.Tensor:
        return self.starts[:, None] + torch.arange(self.horizon)

    def targets(self) -> torch.Tensor:
        """(samples, horizon, regions, 3) normalised targets."""
        return self.panel.labels[self.target_index()]


def window_starts(n_months: int, window_size: int, horizon: int = HORIZON,
                  split: Optional[SplitAssignment] = None) -> Dict[str, List[int]]:
    """First target months of every valid window, grouped by split.

    A window needs `window_size` input months before t and `horizon` target
    months starting at t, all inside the split that contains t.
    """
    if split is None:
        split = SplitAssignment(range(0, n_months), range(n_months, n_months), range(n_months, n_months))
    grouped: Dict[str, List[int]] = {name: [] for name in SPLITS}
    for name, months in split.ranges().items():
        first = max(months.start, window_size)
        last = months.stop - horizon
        grouped[name] = list(range(first, last + 1))
    return grouped


def gather_windows(embeddings: torch.Tensor, starts: torch.Tensor, window_size: int) -> torch.Tensor:
    """(samples, window, regions, D) input windows from a (months, regions, D) panel."""
    index = starts[:, None] - window_size + torch.arange(window_size)
    return embeddings[index]


def build_windows(embeddings: torch.Tensor, labels: torch.Tensor, config: ExperimentConfig,
                  split: SplitAssignment, start_month: str) -> Dict[str, List[WindowSample]]:
    """Materialise window samples from assembled region-month embeddings.

    `embeddings` has shape (months, regions, D) and `labels` (months, regions, 3);
    month 0 is the calendar month `start_month`.
    """
    if embeddings.dim() != 3 or labels.dim() != 3 or embeddings.shape[:2] != labels.shape[:2]:
        raise ShapeError(f"incompatible panels {tuple(embeddings.shape)} and {tuple(labels.shape)}")
    grouped = window_starts(int(embeddings.shape[0]), config.window_size, config.horizon, split)
    if not any(grouped.values()):
        raise WindowingError(
            f"no window of {config.window_size} + {config.horizon} months fits in {embeddings.shape[0]} months"
        )
    result: Dict[str, List[WindowSample]] = {}
    for name, starts in grouped.items():
        result[name] = [
            WindowSample(
                inputs=embeddings[t - config.window_size:t],
                targets=labels[t:t + config.horizon],
                first_target_month=MonthIndex(t, calendar_of(start_month, t)),
            )
            for t in starts
        ]
    logger.debug("windows: %s", {k: len(v) for k, v in result.items()})
    return result


def window_sets(panel: PanelTensors, config: ExperimentConfig, split: SplitAssignment) -> Dict[str, WindowSet]:
    """Index-only windows for training; raises WindowingError when none fit."""
    grouped = window_starts(panel.n_months, config.window_size, config.horizon, split)
    if not any(grouped.values()):
        raise WindowingError(
            f"no window of {config.window_size} + {config.horizon} months fits in {panel.n_months} months"
        )
    return {
        name: WindowSet(panel, torch.tensor(starts, dtype=torch.long), config.window_size, config.horizon)
        for name, starts in grouped.items()
    }


def save_windows(samples: Sequence[WindowSample], path: Union[str, Path]) -> Path:
    """One JSON header line, then inputs and targets as little-endian float32."""
    if not samples:
        raise WindowingError("refusing to save an empty window set")
    inputs = np.stack([s.inputs.detach().cpu().numpy() for s in samples]).astype("<f4")
    targets = np.stack([s.targets.detach().cpu().numpy() for s in samples]).astype("<f4")
    header = {
        "inputs": list(inputs.shape),
        "targets": list(targets.shape),
        "first_target_months": [s.first_target_month.index for s in samples],
        "calendar": [s.first_target_month.calendar for s in samples],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(inputs.tobytes())
        fh.write(targets.tobytes())
    return path


def load_windows(path: Union[str, Path]) -> List[WindowSample]:
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        body = io.BytesIO(fh.read())
    in_shape, tgt_shape = tuple(header["inputs"]), tuple(header["targets"])
    n_in, n_tgt = int(np.prod(in_shape)), int(np.prod(tgt_shape))
    data = np.frombuffer(body.getvalue(), dtype="<f4")
    if data.size != n_in + n_tgt:
        raise ShapeError(f"{path}: payload holds {data.size} values, header promises {n_in + n_tgt}")
    inputs = torch.from_numpy(data[:n_in].reshape(in_shape).astype(np.float32))
    targets = torch.from_numpy(data[n_in:].reshape(tgt_shape).astype(np.float32))
    return [
        WindowSample(inputs[i], targets[i], MonthIndex(int(t), str(c)))
        for i, (t, c) in enumerate(zip(header["first_target_months"], header["calendar"]))
    ]
