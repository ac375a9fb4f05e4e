"""
Calendar-month indexing for gap-free monthly panels.
"""

import re
from typing import List, Tuple

from .types import MonthIndex, MonthFormatError, RangeError


MONTH_PATTERN = re.compile(r"^(\d{4})-(\d{2})$")


def parse_month(month: str) -> Tuple[int, int]:
    """Parse a YYYY-MM string into (year, month)."""
    match = MONTH_PATTERN.match(str(month).strip())
    if not match:
        raise MonthFormatError(f"not a YYYY-MM month: {month!r}")
    year, mon = int(match.group(1)), int(match.group(2))
    if not 1 <= mon <= 12:
        raise MonthFormatError(f"month out of range in {month!r}")
    return year, mon


def _ordinal(month: str) -> int:
    year, mon = parse_month(month)
    return year * 12 + (mon - 1)


def month_index_from_calendar(start: str, month: str) -> MonthIndex:
    """Number of whole months between start and month."""
    offset = _ordinal(month) - _ordinal(start)
    if offset < 0:
        raise RangeError(f"month {month} precedes dataset start {start}")
    return MonthIndex(index=offset, calendar=month.strip())


def calendar_of(start: str, index: int) -> str:
    """Calendar string of the month `index` months after start."""
    if index < 0:
        raise RangeError(f"month index must be >= 0, got {index}")
    ordinal = _ordinal(start) + index
    return f"{ordinal // 12:04d}-{ordinal % 12 + 1:02d}"


def month_range(start: str, count: int) -> List[MonthIndex]:
    """The first `count` months of a panel starting at start."""
    return [MonthIndex(index=i, calendar=calendar_of(start, i)) for i in range(count)]


def months_between(start: str, end: str) -> int:
    """Inclusive number of months from start to end."""
    return month_index_from_calendar(start, end).index + 1
