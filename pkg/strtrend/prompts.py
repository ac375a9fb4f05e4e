"""
Rendering region-month records into text prompts.
"""

import logging
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Context, Decimal
from pathlib import Path
from typing import Iterator, List, Mapping, Tuple, Union

from .data.ingest import Panel
from .data.aggregate import summarize_airbnb
from .data.records import AccessibilityRecord, AirbnbRegionSummary, HumanFlowRecord
from .data.schema import (
    ACCESSIBILITY_LINES,
    BINARY_VARIABLES,
    CATEGORICAL_VARIABLES,
    HUMAN_FLOW_LINES,
    NUMERIC_VARIABLES,
    PromptLine,
)
from .types import Modality


logger = logging.getLogger(__name__)

SEPARATOR = "-" * 59
_CENT = Decimal("0.01")
# wide enough for any finite double
_CENT_CONTEXT = Context(prec=400)


@dataclass(frozen=True)
class Prompt:
    """Text rendering of one region-month record."""
    kind: Modality
    region: str
    month: str
    text: str


def format_value(value: float, integer: bool = False) -> str:
    """Two decimals for reals, rounded half up on the shortest decimal form.

    Integer-valued counts render without a decimal point.
    """
    value = float(value)
    if integer and value.is_integer():
        return str(int(value))
    if not math.isfinite(value):
        return str(value)
    cents = Decimal(repr(value)).quantize(_CENT, rounding=ROUND_HALF_UP, context=_CENT_CONTEXT)
    return str(cents.copy_abs() if cents.is_zero() else cents)


def _render_lines(lines: Tuple[PromptLine, ...], values: Mapping[str, float]) -> List[str]:
    rendered = []
    for line in lines:
        items = ", ".join(
            f"{var.label}: {format_value(values.get(var.key, 0.0), var.integer)}" for var in line.variables
        )
        rendered.append(f"{line.prefix}{items}")
    return rendered


def _join(lines: List[str]) -> str:
    return "\n".join(lines) + "\n"


def render_accessibility(record: AccessibilityRecord) -> Prompt:
    """Accessibility summary: header, then one line per variable group in canonical order."""
    lines = [f"[{record.month} | {record.region}] Accessibility Summary:"]
    lines += _render_lines(ACCESSIBILITY_LINES, record.values)
    return Prompt(Modality.ACCESSIBILITY, record.region, record.month, _join(lines))


def render_human_flow(record: HumanFlowRecord) -> Prompt:
    """Human-flow summary: total, the age x gender grid, then foreign residents / visitors."""
    lines = [f"[{record.month} | {record.region}] Human Flow Summary:"]
    lines += _render_lines(HUMAN_FLOW_LINES, record.values)
    return Prompt(Modality.HUMAN_FLOW, record.region, record.month, _join(lines))


def render_airbnb(summary: AirbnbRegionSummary) -> Prompt:
    """Airbnb feature summary following the fixed Category / Binary / Numerical template.

    Numeric variables without data keep their header line with a zero count
    and drop the statistic lines.
    """
    lines = [
        f"[{summary.month} | {summary.region}] Airbnb Feature Summary:",
        f"Total number of AirBnBs: {summary.total_listings}",
        "",
        "Category Column Attributes:",
    ]
    for var in CATEGORICAL_VARIABLES:
        cat = summary.categorical.get(var.key)
        if cat is None:
            continue
        lines.append(f"Category: {var.label} Information: Total number with data: {cat.with_data}")
        for value in sorted(cat.counts):
            lines.append(f"  - {value}: {cat.counts[value]}")

    lines += [SEPARATOR, "Binary Column Attributes:"]
    for var in BINARY_VARIABLES:
        binary = summary.binary.get(var.key)
        if binary is None:
            continue
        lines.append(f"{var.label} Information: Total number with data: {binary.with_data}")
        lines.append(f"  - Number of {var.label}: {binary.true_count}")

    lines += [SEPARATOR, "Numerical Column Attributes:"]
    for var in NUMERIC_VARIABLES:
        num = summary.numeric.get(var.key)
        if num is None:
            continue
        lines.append(f"{var.label} Information: Total number with data: {num.with_data}")
        if num.with_data == 0:
            continue
        lines += [
            f"  - Mean: {format_value(num.mean)}",
            f"  - Std Dev: {format_value(num.std)}",
            f"  - Median: {format_value(num.median)}",
            f"  - Min: {format_value(num.min)}",
            f"  - Max: {format_value(num.max)}",
        ]
    return Prompt(Modality.AIRBNB, summary.region, summary.month, _join(lines))


def render_region_month(panel: Panel, region: str, month: int, kind: Modality) -> Prompt:
    if kind is Modality.ACCESSIBILITY:
        return render_accessibility(panel.accessibility_record(region, month))
    if kind is Modality.HUMAN_FLOW:
        return render_human_flow(panel.human_flow_record(region, month))
    summary = summarize_airbnb(panel.listings_for(region, month), region, panel.calendar(month))
    return render_airbnb(summary)


def iter_prompts(panel: Panel, kinds: Tuple[Modality, ...] = tuple(Modality)) -> Iterator[Prompt]:
    """Every prompt of the panel, month-major then region then kind."""
    for month in range(panel.n_months):
        for region in panel.regions:
            for kind in kinds:
                yield render_region_month(panel, region, month, kind)


def prompt_path(root: Union[str, Path], prompt: Prompt) -> Path:
    return Path(root) / prompt.kind.value.lower() / prompt.region / f"{prompt.month}.txt"


def dump_prompts(panel: Panel, out_dir: Union[str, Path]) -> int:
    """Write prompts as {kind}/{region}/{YYYY-MM}.txt; returns the number written."""
    count = 0
    for prompt in iter_prompts(panel):
        path = prompt_path(out_dir, prompt)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(prompt.text)
        count += 1
    logger.info("wrote %d prompts to %s", count, out_dir)
    return count
