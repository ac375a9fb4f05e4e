"""
Tests for calendar-month indexing.
"""

import pytest

from strtrend.months import calendar_of, month_index_from_calendar, month_range, months_between, parse_month
from strtrend.types import MonthFormatError, RangeError


def test_month_index_from_calendar():
    """Offsets count whole months across year boundaries."""
    assert month_index_from_calendar("2017-01", "2017-01").index == 0
    assert month_index_from_calendar("2017-01", "2022-07").index == 66
    assert month_index_from_calendar("2017-11", "2018-02").index == 3


def test_month_before_start_raises():
    """A month before the dataset start is a range error."""
    with pytest.raises(RangeError):
        month_index_from_calendar("2017-01", "2016-12")


@pytest.mark.parametrize("bad", ["2017-13", "2017-1", "17-01", "2017/01", ""])
def test_parse_month_rejects_malformed(bad):
    """Only YYYY-MM with a valid month parses."""
    with pytest.raises(MonthFormatError):
        parse_month(bad)


def test_calendar_of_inverts_index():
    """calendar_of is the inverse of month_index_from_calendar."""
    for i in range(0, 80, 7):
        assert month_index_from_calendar("2017-01", calendar_of("2017-01", i)).index == i


def test_month_range_and_months_between():
    """A 67-month panel runs from 2017-01 to 2022-07."""
    months = month_range("2017-01", 67)
    assert months[-1].calendar == "2022-07"
    assert months_between("2017-01", "2022-07") == 67
