"""
strtrend
Regional short-term-rental trend forecasting from prompt embeddings.
"""

from .backends import HashBackend, HttpBackend, NumericBackend, create_backend
from .config import default_config, load_config
from .data.ingest import Panel, load_panel
from .data.synthetic import SyntheticSpec, generate_synthetic
from .embedder import PromptEmbedder, embed_cached
from .events import PipelineEventEmitter
from .experiments import (
    emit_report,
    run_cell,
    run_dim_sweep,
    run_grid,
    run_llm_ablation,
    run_main_comparison,
    run_modality_ablation,
    run_window_sweep,
)
from .model import Forecaster, compute_loss
from .pipeline import ForecastDataset, prepare_dataset
from .training import MetricReport, evaluate, train
from .types import Architecture, EmbeddingDims, ExperimentConfig, Modality, StrTrendError
from .utils.cache import EmbeddingCache

__version__ = "1.0.0"

__all__ = [
    "Architecture",
    "EmbeddingCache",
    "EmbeddingDims",
    "ExperimentConfig",
    "ForecastDataset",
    "Forecaster",
    "HashBackend",
    "HttpBackend",
    "MetricReport",
    "Modality",
    "NumericBackend",
    "Panel",
    "PipelineEventEmitter",
    "PromptEmbedder",
    "StrTrendError",
    "SyntheticSpec",
    "compute_loss",
    "create_backend",
    "default_config",
    "embed_cached",
    "emit_report",
    "evaluate",
    "generate_synthetic",
    "load_config",
    "load_panel",
    "prepare_dataset",
    "run_cell",
    "run_dim_sweep",
    "run_grid",
    "run_llm_ablation",
    "run_main_comparison",
    "run_modality_ablation",
    "run_window_sweep",
    "train",
]
