"""
Region selection and per region-month listing summaries.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Mapping

import numpy as np
import pandas as pd

from ..types import ConfigurationError
from .records import (
    AirbnbRegionSummary,
    BinarySummary,
    CategoricalSummary,
    NumericSummary,
)
from .schema import BINARY_VARIABLES, CATEGORICAL_VARIABLES, NUMERIC_VARIABLES


logger = logging.getLogger(__name__)

MIN_REGIONS = 4


@dataclass(frozen=True)
class ActiveRegionSelection:
    """Regions above the third quartile of mean listing counts."""
    regions: FrozenSet[str]
    threshold: float
    total: int


def region_threshold(listing_counts: Mapping[str, float]) -> float:
    """75th percentile (linear interpolation) of per-region mean listing counts."""
    if len(listing_counts) < MIN_REGIONS:
        raise ConfigurationError(
            f"region selection needs at least {MIN_REGIONS} regions, got {len(listing_counts)}"
        )
    values = np.sort(np.fromiter(listing_counts.values(), dtype=np.float64))
    return float(np.quantile(values, 0.75))


def select_active_regions(listing_counts: Mapping[str, float]) -> FrozenSet[str]:
    """Regions whose mean listing count strictly exceeds the third quartile."""
    return active_region_selection(listing_counts).regions


def active_region_selection(listing_counts: Mapping[str, float]) -> ActiveRegionSelection:
    threshold = region_threshold(listing_counts)
    selected = frozenset(r for r, count in listing_counts.items() if count > threshold)
    logger.info(
        "active regions: threshold %.4f, selected %d of %d", threshold, len(selected), len(listing_counts)
    )
    return ActiveRegionSelection(regions=selected, threshold=threshold, total=len(listing_counts))


def _present(frame: pd.DataFrame, column: str) -> pd.Series:
    if column not in frame.columns:
        return pd.Series([], dtype=object)
    return frame[column][frame[column].notna()]


def summarize_airbnb(listings: pd.DataFrame, region: str, month: str) -> AirbnbRegionSummary:
    """Summarise the listings of one region-month.

    Categorical variables become value counts, binary variables true counts
    and numeric variables mean / population std / median / min / max. Missing
    values are excluded and reported through the with-data counts.
    """
    total = int(len(listings))
    if total == 0:
        return AirbnbRegionSummary(region=region, month=month, total_listings=0)

    categorical = {}
    for var in CATEGORICAL_VARIABLES:
        values = _present(listings, var.key).astype(str)
        counts = {str(k): int(v) for k, v in sorted(values.value_counts().items())}
        categorical[var.key] = CategoricalSummary(with_data=int(len(values)), counts=counts)

    binary = {}
    for var in BINARY_VARIABLES:
        values = _present(listings, var.key)
        binary[var.key] = BinarySummary(
            with_data=int(len(values)), true_count=int(sum(bool(v) for v in values))
        )

    numeric = {}
    for var in NUMERIC_VARIABLES:
        values = _present(listings, var.key).to_numpy(dtype=np.float64)
        if len(values) == 0:
            numeric[var.key] = NumericSummary(with_data=0)
            continue
        numeric[var.key] = NumericSummary(
            with_data=int(len(values)),
            mean=float(np.mean(values)),
            std=float(np.std(values)),
            median=float(np.median(values)),
            min=float(np.min(values)),
            max=float(np.max(values)),
        )

    return AirbnbRegionSummary(
        region=region,
        month=month,
        total_listings=total,
        categorical=categorical,
        binary=binary,
        numeric=numeric,
    )
