"""
Canonical variable catalogue for the four input tables.

The order of every tuple below is frozen: prompts render variables in this
order and the golden prompt files depend on it.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import yaml

from ..types import ConfigurationError


@dataclass(frozen=True)
class Variable:
    """One numeric column of a region-month table."""
    key: str
    label: str
    integer: bool = False


@dataclass(frozen=True)
class PromptLine:
    """Variables rendered together on one prompt line."""
    prefix: str
    variables: Tuple[Variable, ...]


ROAD_TYPES = ("motorway", "trunk", "primary", "secondary", "tertiary", "residential")
AGE_BANDS = ("0-9", "10s", "20s", "30s", "40s", "50s", "60s", "70+")


def _age_key(band: str, sex: str) -> str:
    return "pop_" + band.replace("-", "_").replace("+", "plus") + "_" + sex


ACCESSIBILITY_LINES: Tuple[PromptLine, ...] = (
    PromptLine("", (Variable("road_nodes_near_listings", "Road nodes within 100m of AirBnBs", True),)),
    PromptLine("", (
        Variable("total_roads", "Total number of roads in the dong", True),
        Variable("total_road_length", "Total length"),
    )),
    PromptLine("", (
        Variable("tunnels", "Number of tunnels", True),
        Variable("bridges", "Number of bridges", True),
    )),
    PromptLine("Number of roads by type ", tuple(
        Variable(f"roads_{kind}", kind.capitalize(), True) for kind in ROAD_TYPES
    )),
    PromptLine("Bus ridership ", (
        Variable("bus_boarding", "Boarding", True),
        Variable("bus_alighting", "Alighting", True),
    )),
    PromptLine("Subway ridership ", (
        Variable("subway_boarding", "Boarding", True),
        Variable("subway_alighting", "Alighting", True),
    )),
)

HUMAN_FLOW_LINES: Tuple[PromptLine, ...] = (
    (PromptLine("", (Variable("total_domestic_pop", "Total Domestic Floating Population"),)),)
    + tuple(
        PromptLine(f"Domestic Floating Population by Age and Gender {band} ", (
            Variable(_age_key(band, "male"), "Male"),
            Variable(_age_key(band, "female"), "Female"),
        ))
        for band in AGE_BANDS
    )
    + (
        PromptLine("", (Variable("long_term_foreign", "Long-Term Foreign Residents"),)),
        PromptLine("", (Variable("short_term_foreign", "Short-Term Foreign Visitors"),)),
    )
)


def _flatten(lines: Tuple[PromptLine, ...]) -> Tuple[Variable, ...]:
    return tuple(v for line in lines for v in line.variables)


ACCESSIBILITY_VARIABLES: Tuple[Variable, ...] = _flatten(ACCESSIBILITY_LINES)
HUMAN_FLOW_VARIABLES: Tuple[Variable, ...] = _flatten(HUMAN_FLOW_LINES)

# Listing attributes, grouped as in the listing feature table.
CATEGORICAL_VARIABLES: Tuple[Variable, ...] = (
    Variable("property_type", "Property Type"),
    Variable("listing_type", "Listing Type"),
    Variable("response_time", "Airbnb Response Time"),
    Variable("cancellation_policy", "Cancellation Policy"),
    Variable("checkin_time", "Check-in Time"),
    Variable("checkout_time", "Checkout Time"),
)
BINARY_VARIABLES: Tuple[Variable, ...] = (
    Variable("superhost", "Airbnb Superhost"),
    Variable("instantbook", "Instantbook Enabled"),
    Variable("pets_allowed", "Pets Allowed"),
    Variable("property_manager", "Integrated Property Manager"),
)
NUMERIC_VARIABLES: Tuple[Variable, ...] = (
    Variable("available_days", "Available Days"),
    Variable("blocked_days", "Blocked Days"),
    Variable("bedrooms", "Bedrooms"),
    Variable("bathrooms", "Bathrooms"),
    Variable("max_guests", "Max Guests"),
    Variable("response_rate", "Response Rate"),
    Variable("minimum_stay", "Minimum Stay"),
    Variable("num_photos", "Number of Photos"),
    Variable("overall_rating", "Overall Rating"),
    Variable("num_reviews", "Number of Reviews"),
)

LISTING_GROUPS: Dict[str, Tuple[str, ...]] = {
    "operational": ("available_days", "blocked_days"),
    "accommodation": ("property_type", "listing_type", "bedrooms", "bathrooms", "max_guests"),
    "host": ("response_rate", "response_time", "superhost"),
    "policy": ("cancellation_policy",),
    "checkin": ("checkin_time", "checkout_time", "minimum_stay"),
    "other": ("num_photos", "instantbook", "pets_allowed", "property_manager"),
    "response": ("overall_rating", "num_reviews"),
}

LISTING_KEYS = ("listing_id", "region", "month")
LABEL_COLUMNS = ("reservation_days", "revenue", "num_reservations")

TABLE_COLUMNS: Dict[str, Tuple[str, ...]] = {
    "listings": LISTING_KEYS + tuple(
        v.key for v in CATEGORICAL_VARIABLES + BINARY_VARIABLES + NUMERIC_VARIABLES
    ),
    "accessibility": ("region", "month") + tuple(v.key for v in ACCESSIBILITY_VARIABLES),
    "human_flow": ("region", "month") + tuple(v.key for v in HUMAN_FLOW_VARIABLES),
    "labels": ("region", "month") + LABEL_COLUMNS,
}

TABLE_FILES: Dict[str, str] = {
    "listings": "listings.csv",
    "accessibility": "accessibility.csv",
    "human_flow": "human_flow.csv",
    "labels": "labels.csv",
}


@dataclass(frozen=True)
class SchemaMapping:
    """Binds source column names to canonical names, per table."""
    columns: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    def rename_map(self, table: str) -> Dict[str, str]:
        return dict(self.columns.get(table, {}))

    @classmethod
    def identity(cls) -> "SchemaMapping":
        return cls({})

    @classmethod
    def from_yaml(cls, path: Union[str, Path, None]) -> "SchemaMapping":
        """Load `{table: {source_column: canonical_column}}` from a YAML file."""
        if path is None:
            return cls.identity()
        with Path(path).open("r", encoding="utf-8") as fh:
            try:
                data = yaml.safe_load(fh) or {}
            except yaml.YAMLError as e:
                raise ConfigurationError(f"{path}: malformed YAML ({e})") from e
        if not isinstance(data, dict) or not all(isinstance(m, dict) or m is None for m in data.values()):
            raise ConfigurationError(f"{path}: schema mapping must be {{table: {{source: canonical}}}}")
        unknown = set(data) - set(TABLE_COLUMNS)
        if unknown:
            raise ConfigurationError(f"{path}: unknown tables in schema mapping: {sorted(unknown)}")
        for table, mapping in data.items():
            bad = {c for c in (mapping or {}).values() if c not in TABLE_COLUMNS[table]}
            if bad:
                raise ConfigurationError(
                    f"{path}: {table} maps to unknown canonical columns {sorted(bad)}"
                )
        return cls({table: dict(mapping or {}) for table, mapping in data.items()})


def variable_label(key: str) -> Optional[str]:
    for var in (ACCESSIBILITY_VARIABLES + HUMAN_FLOW_VARIABLES + CATEGORICAL_VARIABLES
                + BINARY_VARIABLES + NUMERIC_VARIABLES):
        if var.key == key:
            return var.label
    return None
