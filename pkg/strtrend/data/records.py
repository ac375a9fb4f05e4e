"""
Record types for listings, region-month external data and listing summaries.
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, Mapping, Optional

import pandas as pd

from .schema import TABLE_COLUMNS


@dataclass(frozen=True)
class ListingRecord:
    """One listing in one month. Any attribute may be missing (None)."""
    listing_id: str
    region: str
    month: str
    # operational
    available_days: Optional[float] = None
    blocked_days: Optional[float] = None
    # accommodation
    property_type: Optional[str] = None
    listing_type: Optional[str] = None
    bedrooms: Optional[float] = None
    bathrooms: Optional[float] = None
    max_guests: Optional[float] = None
    # host
    response_rate: Optional[float] = None
    response_time: Optional[str] = None
    superhost: Optional[bool] = None
    # policy
    cancellation_policy: Optional[str] = None
    # check-in
    checkin_time: Optional[str] = None
    checkout_time: Optional[str] = None
    minimum_stay: Optional[float] = None
    # other
    num_photos: Optional[float] = None
    instantbook: Optional[bool] = None
    pets_allowed: Optional[bool] = None
    property_manager: Optional[bool] = None
    # user response
    overall_rating: Optional[float] = None
    num_reviews: Optional[float] = None


def listing_frame(records: Iterable[ListingRecord]) -> pd.DataFrame:
    """Listing records as a frame with the canonical listing columns."""
    rows = [asdict(r) for r in records]
    return pd.DataFrame(rows, columns=list(TABLE_COLUMNS["listings"]))


@dataclass(frozen=True)
class AccessibilityRecord:
    """Road-network and transit aggregates of one region-month."""
    region: str
    month: str
    values: Mapping[str, float]
    missing: bool = False


@dataclass(frozen=True)
class HumanFlowRecord:
    """Monthly-average floating population of one region-month."""
    region: str
    month: str
    values: Mapping[str, float]
    missing: bool = False


@dataclass(frozen=True)
class CategoricalSummary:
    with_data: int
    counts: Dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class BinarySummary:
    with_data: int
    true_count: int


@dataclass(frozen=True)
class NumericSummary:
    with_data: int
    mean: Optional[float] = None
    std: Optional[float] = None
    median: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None


@dataclass(frozen=True)
class AirbnbRegionSummary:
    """Listing attributes of one region-month, summarised per variable kind."""
    region: str
    month: str
    total_listings: int
    categorical: Dict[str, CategoricalSummary] = field(default_factory=dict)
    binary: Dict[str, BinarySummary] = field(default_factory=dict)
    numeric: Dict[str, NumericSummary] = field(default_factory=dict)
