"""
Chronological splits and train-only label normalisation.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..types import ConfigurationError, LabelDomainError, LabelTriple, TARGETS


@dataclass(frozen=True)
class SplitAssignment:
    """Contiguous, chronologically ordered train / val / test month ranges."""
    train: range
    val: range
    test: range

    def split_of(self, month: int) -> Optional[str]:
        for name in ("train", "val", "test"):
            if month in getattr(self, name):
                return name
        return None

    def ranges(self) -> Dict[str, range]:
        return {"train": self.train, "val": self.val, "test": self.test}


def assign_splits(total_months: int, split: Tuple[int, int, int]) -> SplitAssignment:
    """Split `total_months` into consecutive train / val / test ranges."""
    tr, va, te = split
    if min(tr, va, te) < 0 or tr + va + te != total_months:
        raise ConfigurationError(
            f"split {tuple(split)} does not sum to the {total_months} available months"
        )
    return SplitAssignment(
        train=range(0, tr),
        val=range(tr, tr + va),
        test=range(tr + va, total_months),
    )


def _population_stats(values: np.ndarray, axis) -> Tuple[np.ndarray, np.ndarray]:
    mean = values.mean(axis=axis)
    std = values.std(axis=axis)
    std = np.where(std > 0, std, 1.0)
    return mean, std


@dataclass(frozen=True)
class NormStats:
    """Per-target log-label statistics and per-feature tabular statistics, from training months."""
    label_mean: Tuple[float, float, float]
    label_std: Tuple[float, float, float]
    feature_mean: Dict[str, Tuple[float, ...]] = field(default_factory=dict)
    feature_std: Dict[str, Tuple[float, ...]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, object]:
        return {
            "label_mean": list(self.label_mean),
            "label_std": list(self.label_std),
            "feature_mean": {k: list(v) for k, v in self.feature_mean.items()},
            "feature_std": {k: list(v) for k, v in self.feature_std.items()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> "NormStats":
        return cls(
            label_mean=tuple(float(v) for v in data["label_mean"]),
            label_std=tuple(float(v) for v in data["label_std"]),
            feature_mean={k: tuple(float(x) for x in v) for k, v in (data.get("feature_mean") or {}).items()},
            feature_std={k: tuple(float(x) for x in v) for k, v in (data.get("feature_std") or {}).items()},
        )

    def with_features(self, name: str, mean: Sequence[float], std: Sequence[float]) -> "NormStats":
        feature_mean = dict(self.feature_mean)
        feature_std = dict(self.feature_std)
        feature_mean[name] = tuple(float(v) for v in mean)
        feature_std[name] = tuple(float(v) for v in std)
        return NormStats(self.label_mean, self.label_std, feature_mean, feature_std)


def _check_domain(raw: np.ndarray) -> None:
    if not np.all(np.isfinite(raw)) or np.any(raw < 0):
        raise LabelDomainError("raw labels must be finite and non-negative")


def compute_label_stats(raw_labels: np.ndarray, split: SplitAssignment) -> NormStats:
    """Mean and population std of log(1 + y) per target over the training months.

    `raw_labels` has shape (months, regions, 3).
    """
    train = np.asarray(raw_labels, dtype=np.float64)[split.train.start:split.train.stop]
    if train.size == 0:
        raise ConfigurationError("cannot compute label statistics from an empty training split")
    _check_domain(train)
    mean, std = _population_stats(np.log1p(train).reshape(-1, len(TARGETS)), axis=0)
    return NormStats(tuple(float(v) for v in mean), tuple(float(v) for v in std))


def normalize_labels(raw: np.ndarray, stats: NormStats) -> np.ndarray:
    """Vectorised forward transform over a trailing target axis."""
    raw = np.asarray(raw, dtype=np.float64)
    _check_domain(raw)
    return (np.log1p(raw) - np.asarray(stats.label_mean)) / np.asarray(stats.label_std)


def denormalize_labels(normalized: np.ndarray, stats: NormStats) -> np.ndarray:
    """Inverse of normalize_labels."""
    normalized = np.asarray(normalized, dtype=np.float64)
    return np.expm1(normalized * np.asarray(stats.label_std) + np.asarray(stats.label_mean))


def transform_labels(raw: LabelTriple, stats: NormStats) -> LabelTriple:
    """(log(1 + y) - mean) / std for each target."""
    raw.validate_raw()
    return LabelTriple.from_sequence(normalize_labels(np.array(raw.as_tuple()), stats))


def inverse_transform_labels(normalized: LabelTriple, stats: NormStats) -> LabelTriple:
    return LabelTriple.from_sequence(denormalize_labels(np.array(normalized.as_tuple()), stats))


def feature_stats(values: np.ndarray, split: SplitAssignment) -> Tuple[np.ndarray, np.ndarray]:
    """Train-month mean and population std of a (months, regions, features) array."""
    train = values[split.train.start:split.train.stop].reshape(-1, values.shape[-1])
    return _population_stats(train, axis=0)
