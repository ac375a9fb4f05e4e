"""
From a loaded panel to model-ready tensors.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import torch

from .data.aggregate import ActiveRegionSelection, active_region_selection
from .data.ingest import Panel
from .data.normalize import (
    NormStats,
    SplitAssignment,
    assign_splits,
    compute_label_stats,
    feature_stats,
    normalize_labels,
)
from .data.schema import (
    ACCESSIBILITY_VARIABLES,
    BINARY_VARIABLES,
    CATEGORICAL_VARIABLES,
    HUMAN_FLOW_VARIABLES,
    NUMERIC_VARIABLES,
)
from .embedder import PromptEmbedder
from .features import PanelTensors
from .prompts import render_region_month
from .types import ConfigurationError, ExperimentConfig, Modality


logger = logging.getLogger(__name__)


def airbnb_table(listings: pd.DataFrame, regions: List[str], n_months: int,
                 split: SplitAssignment) -> Tuple[np.ndarray, List[str], Dict[str, Tuple[str, ...]]]:
    """Dong-level listing aggregates as (months, regions, features).

    Numeric aggregates are kept as-is; each categorical variable becomes
    per-value counts over the values seen in training months. Values first
    seen in later months contribute nothing.
    """
    index = pd.MultiIndex.from_product([regions, range(n_months)], names=["region", "month"])
    grouped = listings.groupby(["region", "month"])
    parts = [grouped.size().rename("total_listings")]
    for var in BINARY_VARIABLES:
        flags = listings[var.key].map({True: 1.0, False: 0.0})
        parts.append(flags.groupby([listings["region"], listings["month"]]).sum().rename(f"{var.key}_count"))
    for var in NUMERIC_VARIABLES:
        numeric = pd.to_numeric(listings[var.key], errors="coerce")
        parts.append(numeric.groupby([listings["region"], listings["month"]]).mean().rename(f"{var.key}_mean"))

    vocabulary: Dict[str, Tuple[str, ...]] = {}
    train_rows = listings["month"] < split.train.stop
    for var in CATEGORICAL_VARIABLES:
        present = listings[listings[var.key].notna()]
        values = present[var.key].astype(str)
        vocab = tuple(sorted(values[train_rows[present.index]].unique()))
        vocabulary[var.key] = vocab
        if not vocab:
            continue
        unseen = ~values.isin(vocab)
        if unseen.any():
            logger.warning(
                "%s: %d listing(s) with values unseen in training (%s) encoded as zeros",
                var.key, int(unseen.sum()), ", ".join(sorted(values[unseen].unique())[:5]),
            )
        counts = (
            present.assign(_value=values)
            .groupby(["region", "month", "_value"]).size()
            .unstack(fill_value=0)
            .reindex(columns=list(vocab), fill_value=0)
        )
        counts.columns = [f"{var.key}={v}" for v in vocab]
        parts.append(counts)

    table = pd.concat(parts, axis=1).reindex(index).fillna(0.0)
    values = table.to_numpy(dtype=np.float64)
    values = values.reshape(len(regions), n_months, -1).transpose(1, 0, 2).copy()
    return values, list(table.columns), vocabulary


@dataclass
class ForecastDataset:
    """Selected regions, splits, normalised labels and lazily built inputs."""
    panel: Panel
    split: SplitAssignment
    stats: NormStats
    raw_labels: np.ndarray
    labels: np.ndarray
    selection: Optional[ActiveRegionSelection] = None
    embedder: Optional[PromptEmbedder] = None
    vocabulary: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    _embeddings: Dict[Modality, np.ndarray] = field(default_factory=dict, repr=False)
    _tabular: Dict[Modality, np.ndarray] = field(default_factory=dict, repr=False)
    _columns: Dict[Modality, List[str]] = field(default_factory=dict, repr=False)

    @property
    def regions(self) -> List[str]:
        return list(self.panel.regions)

    def embeddings(self, modality: Modality) -> np.ndarray:
        """(months, regions, 3072) prompt embeddings for one modality."""
        if modality not in self._embeddings:
            if self.embedder is None:
                raise ConfigurationError("prompt embeddings requested but no embedder was configured")
            texts = [
                render_region_month(self.panel, region, month, modality).text
                for month in range(self.panel.n_months)
                for region in self.panel.regions
            ]
            logger.info("embedding %d %s prompts", len(texts), modality.title)
            matrix = self.embedder.embed_texts_sync(texts)
            self._embeddings[modality] = matrix.reshape(self.panel.n_months, len(self.panel.regions), -1)
        return self._embeddings[modality]

    def tabular(self, modality: Modality) -> np.ndarray:
        """(months, regions, features) tabular inputs, z-scored on training months."""
        if modality not in self._tabular:
            if modality is Modality.AIRBNB:
                values, columns, self.vocabulary = airbnb_table(
                    self.panel.listings, self.regions, self.panel.n_months, self.split
                )
            else:
                table = "accessibility" if modality is Modality.ACCESSIBILITY else "human_flow"
                variables = ACCESSIBILITY_VARIABLES if modality is Modality.ACCESSIBILITY else HUMAN_FLOW_VARIABLES
                values, columns = self.panel.table_array(table), [v.key for v in variables]
            mean, std = feature_stats(values, self.split)
            self.stats = self.stats.with_features(modality.value, mean, std)
            self._tabular[modality] = (values - mean) / std
            self._columns[modality] = columns
        return self._tabular[modality]

    def tabular_columns(self, modality: Modality) -> List[str]:
        self.tabular(modality)
        return self._columns[modality]


def prepare_dataset(panel: Panel, config: ExperimentConfig,
                    embedder: Optional[PromptEmbedder] = None) -> ForecastDataset:
    """Select active regions, split months and normalise labels on the training split."""
    selection = None
    if config.data.select_active:
        selection = active_region_selection(panel.listing_counts())
        if not selection.regions:
            raise ConfigurationError("no region lies above the listing-count threshold")
        panel = panel.restrict(selection.regions)
    split = assign_splits(panel.n_months, config.split)
    raw = panel.label_array()
    stats = compute_label_stats(raw, split)
    return ForecastDataset(
        panel=panel,
        split=split,
        stats=stats,
        raw_labels=raw,
        labels=normalize_labels(raw, stats),
        selection=selection,
        embedder=embedder,
    )


def to_panel_tensors(dataset: ForecastDataset, config: ExperimentConfig) -> PanelTensors:
    """Inputs for the config's modalities on its encoding path (prompt embeddings or tabular)."""
    features = {}
    for modality in config.active_modalities:
        values = dataset.embeddings(modality) if config.use_llm_embedding else dataset.tabular(modality)
        features[modality] = torch.as_tensor(values, dtype=torch.float32)
    return PanelTensors(
        features=features,
        labels=torch.as_tensor(dataset.labels, dtype=torch.float32),
        regions=dataset.regions,
        months=dataset.panel.months,
    )
