"""
Type definitions and data classes for the strtrend package.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, NewType, Optional, Tuple


RegionId = NewType("RegionId", str)

TARGETS: Tuple[str, str, str] = ("reservation_days", "revenue", "num_reservations")
TARGET_LABELS: Dict[str, str] = {
    "reservation_days": "Res. Days",
    "revenue": "Revenue",
    "num_reservations": "#Reservations",
}

EMBEDDING_DIM = 3072
HORIZON = 3


class Modality(Enum):
    """Input modalities, also used as prompt kinds."""
    ACCESSIBILITY = "ACCESSIBILITY"
    HUMAN_FLOW = "HUMAN_FLOW"
    AIRBNB = "AIRBNB"

    @property
    def title(self) -> str:
        return _MODALITY_TITLES[self]


_MODALITY_TITLES = {
    Modality.ACCESSIBILITY: "Accessibility",
    Modality.HUMAN_FLOW: "Human Flow",
    Modality.AIRBNB: "Airbnb",
}

# Canonical segment order of a region-month embedding.
MODALITY_ORDER: Tuple[Modality, ...] = (
    Modality.ACCESSIBILITY,
    Modality.HUMAN_FLOW,
    Modality.AIRBNB,
)


class Architecture(Enum):
    """Sequence encoders available to the forecaster."""
    RNN = "RNN"
    LSTM = "LSTM"
    TRANSFORMER = "TRANSFORMER"


class MetricSpace(Enum):
    """Space in which forecast errors are measured."""
    NORMALIZED = "normalized-log"
    RAW = "raw"


class BackendKind(Enum):
    """Embedding backends."""
    HASH = "hash"
    NUMERIC = "numeric"
    HTTP = "http"


@dataclass(frozen=True)
class MonthIndex:
    """Position of a calendar month inside a dataset."""
    index: int
    calendar: str


@dataclass(frozen=True)
class LabelTriple:
    """The three forecast targets of one region-month."""
    reservation_days: float
    revenue: float
    num_reservations: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.reservation_days, self.revenue, self.num_reservations)

    @classmethod
    def from_sequence(cls, values) -> "LabelTriple":
        a, b, c = (float(v) for v in values)
        return cls(a, b, c)

    def validate_raw(self) -> None:
        for name, value in zip(TARGETS, self.as_tuple()):
            if not math.isfinite(value) or value < 0:
                raise LabelDomainError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class EmbeddingDims:
    """Output widths of the per-modality reduction heads and the label expander."""
    accessibility: int = 48
    human_flow: int = 48
    airbnb: int = 128
    label: int = 4

    @property
    def total(self) -> int:
        return self.accessibility + self.human_flow + self.airbnb + self.label

    def for_modality(self, modality: Modality) -> int:
        return {
            Modality.ACCESSIBILITY: self.accessibility,
            Modality.HUMAN_FLOW: self.human_flow,
            Modality.AIRBNB: self.airbnb,
        }[modality]

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.accessibility, self.human_flow, self.airbnb, self.label)

    def validate(self) -> None:
        for name, value in zip(("accessibility", "human_flow", "airbnb", "label"), self.as_tuple()):
            if not isinstance(value, int) or value <= 0:
                raise ConfigurationError(f"dims.{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class ModelSettings:
    """Sequence encoder hyperparameters."""
    hidden_size: int = 128
    num_layers: int = 2
    num_heads: int = 4
    ff_size: int = 256
    dropout: float = 0.0
    readout: str = "last"

    def validate(self) -> None:
        if self.hidden_size <= 0 or self.num_layers <= 0:
            raise ConfigurationError("model.hidden_size and model.num_layers must be positive")
        if self.hidden_size % self.num_heads != 0:
            raise ConfigurationError(
                f"model.hidden_size ({self.hidden_size}) must be divisible by "
                f"model.num_heads ({self.num_heads})"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"model.dropout must be in [0, 1), got {self.dropout}")
        if self.readout != "last":
            raise ConfigurationError(f"unsupported model.readout {self.readout!r}")


@dataclass(frozen=True)
class TrainSettings:
    """Optimiser and early-stopping settings."""
    learning_rate: float = 1e-3
    patience: int = 20
    max_epochs: int = 500
    batching: str = "full"

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ConfigurationError("train.learning_rate must be positive")
        if self.patience < 1 or self.max_epochs < 1:
            raise ConfigurationError("train.patience and train.max_epochs must be >= 1")
        if self.batching != "full":
            raise ConfigurationError(f"unsupported train.batching {self.batching!r}")


@dataclass(frozen=True)
class BackendSettings:
    """Embedding backend selection and transport settings."""
    kind: BackendKind = BackendKind.NUMERIC
    endpoint: str = ""
    model_id: str = ""
    token: str = ""
    cache_dir: str = ".strtrend-cache"
    max_concurrency: int = 4
    retries: int = 3
    timeout: float = 30.0

    def validate(self) -> None:
        if self.max_concurrency < 1 or self.retries < 1:
            raise ConfigurationError("backend.max_concurrency and backend.retries must be >= 1")
        if self.kind is BackendKind.HTTP and not self.endpoint:
            raise ConfigurationError("backend.endpoint is required for the http backend")


@dataclass(frozen=True)
class DataSettings:
    """Where the four input tables live and how regions are filtered."""
    path: str = "data"
    schema: Optional[str] = None
    select_active: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to replay one training run."""
    window_size: int = 6
    horizon: int = HORIZON
    stride: int = 1
    dims: EmbeddingDims = field(default_factory=EmbeddingDims)
    loss_weights: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    seed: int = 43
    architecture: Architecture = Architecture.LSTM
    modalities: FrozenSet[Modality] = frozenset(MODALITY_ORDER)
    use_llm_embedding: bool = True
    split: Tuple[int, int, int] = (51, 8, 8)
    label_lag: int = 1
    repetitions: int = 1
    model: ModelSettings = field(default_factory=ModelSettings)
    train: TrainSettings = field(default_factory=TrainSettings)
    backend: BackendSettings = field(default_factory=BackendSettings)
    data: DataSettings = field(default_factory=DataSettings)

    @property
    def active_modalities(self) -> Tuple[Modality, ...]:
        """Active modalities in canonical order."""
        return tuple(m for m in MODALITY_ORDER if m in self.modalities)

    @property
    def input_dim(self) -> int:
        """Width D of one region-month embedding under this config."""
        return sum(self.dims.for_modality(m) for m in self.active_modalities) + self.dims.label

    @property
    def is_label_only(self) -> bool:
        return not self.modalities

    def validate(self) -> None:
        if self.window_size < 1:
            raise ConfigurationError(f"window_size must be >= 1, got {self.window_size}")
        if self.horizon != HORIZON:
            raise ConfigurationError(f"horizon is fixed at {HORIZON}, got {self.horizon}")
        if self.stride != 1:
            raise ConfigurationError(f"stride is fixed at 1, got {self.stride}")
        if len(self.loss_weights) != 3:
            raise ConfigurationError("loss_weights must hold exactly (alpha, beta, gamma)")
        if any(not math.isfinite(w) or w < 0 for w in self.loss_weights):
            raise ConfigurationError(f"loss weights must be finite and >= 0, got {self.loss_weights}")
        if not any(self.loss_weights):
            raise ConfigurationError("at least one loss weight must be non-zero")
        if len(self.split) != 3 or any(s < 0 for s in self.split) or self.split[0] < 1:
            raise ConfigurationError(f"split must be three non-negative ints with train >= 1, got {self.split}")
        if self.label_lag < 0:
            raise ConfigurationError(f"label_lag must be >= 0, got {self.label_lag}")
        if self.repetitions < 1:
            raise ConfigurationError(f"repetitions must be >= 1, got {self.repetitions}")
        unknown = set(self.modalities) - set(MODALITY_ORDER)
        if unknown:
            raise ConfigurationError(f"unknown modalities: {sorted(str(m) for m in unknown)}")
        self.dims.validate()
        self.model.validate()
        self.train.validate()
        self.backend.validate()


class StrTrendError(Exception):
    """Base exception for strtrend errors."""
    pass


class ConfigurationError(StrTrendError):
    """Raised for invalid configuration values."""
    pass


class RangeError(StrTrendError, ValueError):
    """Raised when a month lies outside the dataset calendar."""
    pass


class MonthFormatError(StrTrendError, ValueError):
    """Raised for strings that are not YYYY-MM months."""
    pass


class IngestionError(StrTrendError):
    """Raised when an input table cannot be ingested."""

    def __init__(self, path: str, row: Optional[int], message: str):
        self.path = path
        self.row = row
        where = f"{path}" if row is None else f"{path}, row {row}"
        super().__init__(f"{where}: {message}")


class LabelDomainError(StrTrendError, ValueError):
    """Raised for labels outside the log transform's domain."""
    pass


class EmbeddingError(StrTrendError):
    """Raised when an embedding cannot be produced for a prompt."""

    def __init__(self, prompt_key: str, message: str):
        self.prompt_key = prompt_key
        super().__init__(f"[{prompt_key[:16]}] {message}")


class EmbeddingShapeError(EmbeddingError):
    """Raised when a backend returns a vector of the wrong length."""
    pass


class AssemblyError(StrTrendError):
    """Raised when region-month parts cannot be concatenated."""
    pass


class ShapeError(StrTrendError, ValueError):
    """Raised when a tensor violates a shape contract."""
    pass


class WindowingError(StrTrendError):
    """Raised when no sliding-window sample can be formed."""
    pass


class TrainingError(StrTrendError):
    """Raised when training diverges."""

    def __init__(self, message: str, epoch: int, batch: int, components: Dict[str, Any]):
        self.epoch = epoch
        self.batch = batch
        self.components = components
        super().__init__(f"{message} (epoch={epoch}, batch={batch}, components={components})")


class ReportError(StrTrendError):
    """Raised when a report cannot be produced."""
    pass
