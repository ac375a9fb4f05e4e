"""
Loading the four input tables into a dense region x month panel.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from ..months import calendar_of, month_index_from_calendar, months_between, parse_month
from ..types import IngestionError, MonthFormatError
from .records import AccessibilityRecord, HumanFlowRecord
from .schema import (
    ACCESSIBILITY_VARIABLES,
    BINARY_VARIABLES,
    CATEGORICAL_VARIABLES,
    HUMAN_FLOW_VARIABLES,
    LABEL_COLUMNS,
    NUMERIC_VARIABLES,
    TABLE_COLUMNS,
    TABLE_FILES,
    SchemaMapping,
)


logger = logging.getLogger(__name__)

_TRUE = {"true", "t", "1", "yes", "y"}
_FALSE = {"false", "f", "0", "no", "n"}

# Header is line 1 of every file.
_ROW_OFFSET = 2


@dataclass(frozen=True)
class PanelPaths:
    """Locations of the four input tables."""
    listings: Path
    accessibility: Path
    human_flow: Path
    labels: Path

    @classmethod
    def in_dir(cls, directory: Union[str, Path]) -> "PanelPaths":
        directory = Path(directory)
        return cls(**{table: directory / name for table, name in TABLE_FILES.items()})

    def as_dict(self) -> Dict[str, Path]:
        return {
            "listings": self.listings,
            "accessibility": self.accessibility,
            "human_flow": self.human_flow,
            "labels": self.labels,
        }


@dataclass
class Panel:
    """Dense region x month panel.

    `accessibility`, `human_flow` and `labels` are indexed by (region, month)
    where month is the integer month index; each carries a boolean `missing`
    column marking zero-filled cells. `listings` holds one row per
    listing-month with an integer `month` column.
    """
    start_month: str
    n_months: int
    regions: List[str]
    listings: pd.DataFrame
    accessibility: pd.DataFrame
    human_flow: pd.DataFrame
    labels: pd.DataFrame
    _listing_groups: Dict[Tuple[str, int], pd.DataFrame] = field(default_factory=dict, repr=False)

    @property
    def months(self) -> List[str]:
        return [calendar_of(self.start_month, i) for i in range(self.n_months)]

    def calendar(self, month: int) -> str:
        return calendar_of(self.start_month, month)

    def listings_for(self, region: str, month: int) -> pd.DataFrame:
        if not self._listing_groups and not self.listings.empty:
            self._listing_groups = {
                (str(r), int(m)): frame
                for (r, m), frame in self.listings.groupby(["region", "month"], sort=True)
            }
        empty = self.listings.iloc[0:0]
        return self._listing_groups.get((region, month), empty)

    def accessibility_record(self, region: str, month: int) -> AccessibilityRecord:
        row = self.accessibility.loc[(region, month)]
        values = {v.key: float(row[v.key]) for v in ACCESSIBILITY_VARIABLES}
        return AccessibilityRecord(region, self.calendar(month), values, bool(row["missing"]))

    def human_flow_record(self, region: str, month: int) -> HumanFlowRecord:
        row = self.human_flow.loc[(region, month)]
        values = {v.key: float(row[v.key]) for v in HUMAN_FLOW_VARIABLES}
        return HumanFlowRecord(region, self.calendar(month), values, bool(row["missing"]))

    def label_array(self) -> np.ndarray:
        """Raw labels as an array of shape (months, regions, 3)."""
        frame = self.labels.reindex(self._full_index())
        values = frame[list(LABEL_COLUMNS)].to_numpy(dtype=np.float64)
        return values.reshape(len(self.regions), self.n_months, 3).transpose(1, 0, 2).copy()

    def table_array(self, table: str) -> np.ndarray:
        """Numeric variables of `accessibility` or `human_flow` as (months, regions, vars)."""
        variables = ACCESSIBILITY_VARIABLES if table == "accessibility" else HUMAN_FLOW_VARIABLES
        frame = getattr(self, table).reindex(self._full_index())
        values = frame[[v.key for v in variables]].to_numpy(dtype=np.float64)
        return values.reshape(len(self.regions), self.n_months, -1).transpose(1, 0, 2).copy()

    def listing_counts(self) -> Dict[str, float]:
        """Mean number of listings per month for every region."""
        counts = self.listings.groupby("region").size() if not self.listings.empty else pd.Series(dtype=float)
        return {r: float(counts.get(r, 0)) / self.n_months for r in self.regions}

    def restrict(self, regions: Iterable[str]) -> "Panel":
        """Sub-panel over the given regions (kept in sorted order)."""
        keep = sorted(set(regions))
        unknown = set(keep) - set(self.regions)
        if unknown:
            raise KeyError(f"unknown regions: {sorted(unknown)}")

        def region_level(frame: pd.DataFrame) -> pd.DataFrame:
            return frame[frame.index.get_level_values("region").isin(keep)]

        return replace(
            self,
            regions=keep,
            listings=self.listings[self.listings["region"].isin(keep)].reset_index(drop=True),
            accessibility=region_level(self.accessibility),
            human_flow=region_level(self.human_flow),
            labels=region_level(self.labels),
            _listing_groups={},
        )

    def _full_index(self) -> pd.MultiIndex:
        return pd.MultiIndex.from_product(
            [self.regions, range(self.n_months)], names=["region", "month"]
        )


def _read_table(table: str, path: Path, schema: SchemaMapping) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=True, encoding="utf-8")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise IngestionError(str(path), None, f"unreadable delimited file: {e}") from e

    frame = frame.rename(columns=schema.rename_map(table))
    allowed = set(TABLE_COLUMNS[table])
    unknown = [c for c in frame.columns if c not in allowed]
    if unknown:
        raise IngestionError(str(path), 1, f"unknown column(s) {unknown}")

    required = ("listing_id", "region", "month") if table == "listings" else TABLE_COLUMNS[table]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise IngestionError(str(path), 1, f"missing column(s) {missing}")

    for row, region in enumerate(frame["region"]):
        if pd.isna(region) or not str(region).strip():
            raise IngestionError(str(path), row + _ROW_OFFSET, "empty region identifier")
    frame["region"] = frame["region"].str.strip()
    frame["month"] = frame["month"].str.strip()
    for row, month in enumerate(frame["month"]):
        try:
            parse_month(month)
        except MonthFormatError as e:
            raise IngestionError(str(path), row + _ROW_OFFSET, f"unparseable month {month!r}") from e
    return frame


def _numeric(frame: pd.DataFrame, columns: Iterable[str], path: Path, non_negative: bool) -> None:
    for column in columns:
        if column not in frame.columns:
            frame[column] = np.nan
            continue
        raw = frame[column]
        parsed = pd.to_numeric(raw, errors="coerce")
        bad = parsed.isna() & raw.notna()
        bad |= ~np.isfinite(parsed.fillna(0.0))
        if non_negative:
            bad |= parsed < 0
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise IngestionError(
                str(path), row + _ROW_OFFSET, f"invalid value {raw.iloc[row]!r} in column {column}"
            )
        frame[column] = parsed.astype(float)


def _binary(frame: pd.DataFrame, columns: Iterable[str], path: Path) -> None:
    for column in columns:
        if column not in frame.columns:
            frame[column] = None
            continue
        parsed = []
        for row, value in enumerate(frame[column]):
            if pd.isna(value):
                parsed.append(None)
                continue
            text = str(value).strip().lower()
            if text in _TRUE:
                parsed.append(True)
            elif text in _FALSE:
                parsed.append(False)
            else:
                raise IngestionError(str(path), row + _ROW_OFFSET, f"invalid boolean {value!r} in {column}")
        frame[column] = pd.Series(parsed, index=frame.index, dtype=object)


def _check_duplicates(frame: pd.DataFrame, keys: List[str], path: Path) -> None:
    dup = frame.duplicated(subset=keys, keep="first")
    if dup.any():
        row = int(np.flatnonzero(dup.to_numpy())[0])
        values = ", ".join(str(frame.iloc[row][k]) for k in keys)
        raise IngestionError(str(path), row + _ROW_OFFSET, f"duplicate ({', '.join(keys)}) = ({values})")


def _check_complete_labels(frame: pd.DataFrame, regions: List[str], n_months: int, start: str,
                           path: Path) -> None:
    """Labels are never zero-filled: every (region, month) needs all three targets."""
    partial = frame[list(LABEL_COLUMNS)].isna().any(axis=1)
    if partial.any():
        row = int(np.flatnonzero(partial.to_numpy())[0])
        raise IngestionError(str(path), row + _ROW_OFFSET, "empty label value")
    present = set(zip(frame["region"], frame["month"]))
    for region in regions:
        for month in range(n_months):
            if (region, month) not in present:
                raise IngestionError(
                    str(path), None, f"no label row for region {region} in {calendar_of(start, month)}"
                )


def _densify(frame: pd.DataFrame, columns: List[str], regions: List[str], n_months: int,
             table: str) -> pd.DataFrame:
    frame = frame.set_index(["region", "month"])[columns]
    full = pd.MultiIndex.from_product([regions, range(n_months)], names=["region", "month"])
    dense = frame.reindex(full)
    missing = dense[columns].isna().all(axis=1)
    dense = dense.fillna(0.0)
    dense["missing"] = missing.to_numpy()
    n_missing = int(missing.sum())
    if n_missing:
        logger.warning("%s: %d region-month cell(s) missing, zero-filled and flagged", table, n_missing)
    return dense


def load_panel(paths: Union[PanelPaths, str, Path],
               schema: Optional[SchemaMapping] = None) -> Panel:
    """Read the four tables and densify them to every (region, month) pair."""
    if not isinstance(paths, PanelPaths):
        paths = PanelPaths.in_dir(paths)
    schema = schema or SchemaMapping.identity()

    frames = {table: _read_table(table, path, schema) for table, path in paths.as_dict().items()}

    all_months = sorted({m for f in frames.values() for m in f["month"]}, key=parse_month)
    if not all_months:
        raise IngestionError(str(paths.labels), None, "no rows in any table")
    start, end = all_months[0], all_months[-1]
    n_months = months_between(start, end)
    regions = sorted({r for f in frames.values() for r in f["region"]})

    for table, frame in frames.items():
        frame["month"] = [month_index_from_calendar(start, m).index for m in frame["month"]]

    listings = frames["listings"]
    listings["listing_id"] = listings["listing_id"].str.strip()
    _check_duplicates(listings, ["region", "month", "listing_id"], paths.listings)
    _numeric(listings, [v.key for v in NUMERIC_VARIABLES], paths.listings, non_negative=True)
    _binary(listings, [v.key for v in BINARY_VARIABLES], paths.listings)
    for var in CATEGORICAL_VARIABLES:
        if var.key not in listings.columns:
            listings[var.key] = None
    days = listings["available_days"].fillna(0.0) + listings["blocked_days"].fillna(0.0)
    if (days > 31).any():
        row = int(np.flatnonzero((days > 31).to_numpy())[0])
        raise IngestionError(str(paths.listings), row + _ROW_OFFSET, "available_days + blocked_days exceeds 31")
    listings = listings[list(TABLE_COLUMNS["listings"])].reset_index(drop=True)

    dense = {}
    for table, variables in (
        ("accessibility", [v.key for v in ACCESSIBILITY_VARIABLES]),
        ("human_flow", [v.key for v in HUMAN_FLOW_VARIABLES]),
        ("labels", list(LABEL_COLUMNS)),
    ):
        path = paths.as_dict()[table]
        frame = frames[table]
        _check_duplicates(frame, ["region", "month"], path)
        _numeric(frame, variables, path, non_negative=True)
        if table == "labels":
            _check_complete_labels(frame, regions, n_months, start, path)
        dense[table] = _densify(frame, variables, regions, n_months, table)

    logger.info(
        "loaded panel: %d regions x %d months (%s..%s), %d listing rows",
        len(regions), n_months, start, end, len(listings),
    )
    return Panel(
        start_month=start,
        n_months=n_months,
        regions=regions,
        listings=listings,
        accessibility=dense["accessibility"],
        human_flow=dense["human_flow"],
        labels=dense["labels"],
    )
