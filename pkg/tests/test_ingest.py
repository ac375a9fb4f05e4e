"""
Tests for loading input tables into a panel.
"""

import shutil

import numpy as np
import pandas as pd
import pytest

from strtrend.data.ingest import load_panel
from strtrend.data.schema import SchemaMapping, TABLE_FILES
from strtrend.types import ConfigurationError, IngestionError

from .conftest import SYNTH_MONTHS, SYNTH_REGIONS


@pytest.fixture
def data_copy(synthetic_dir, tmp_path):
    """A writable copy of the synthetic tables."""
    out = tmp_path / "data"
    shutil.copytree(synthetic_dir, out)
    return out


def _edit(directory, table, fn):
    path = directory / TABLE_FILES[table]
    frame = pd.read_csv(path, dtype=str)
    frame = fn(frame)
    frame.to_csv(path, index=False)


def test_load_panel_shapes(panel):
    """Every table is densified to regions x months."""
    assert panel.n_months == SYNTH_MONTHS
    assert len(panel.regions) == SYNTH_REGIONS
    assert panel.start_month == "2017-01"
    assert panel.label_array().shape == (SYNTH_MONTHS, SYNTH_REGIONS, 3)
    assert panel.table_array("human_flow").shape[:2] == (SYNTH_MONTHS, SYNTH_REGIONS)
    assert np.issubdtype(panel.listings["month"].dtype, np.integer)


def test_label_array_matches_table(panel, synthetic_dir):
    """label_array puts (region, month) values at [month, region]."""
    labels = pd.read_csv(synthetic_dir / "labels.csv")
    row = labels.iloc[5]
    region = panel.regions.index(row["region"])
    month = panel.months.index(row["month"])
    np.testing.assert_allclose(
        panel.label_array()[month, region],
        row[["reservation_days", "revenue", "num_reservations"]].to_numpy(dtype=float),
    )


def test_missing_cells_are_zero_filled(data_copy, caplog):
    """A dropped region-month row becomes zeros with the missing flag set."""
    _edit(data_copy, "accessibility", lambda f: f.iloc[1:])
    panel = load_panel(data_copy)
    first = panel.accessibility.iloc[0]
    assert bool(first["missing"])
    assert panel.accessibility_record("D000", 0).missing
    assert "zero-filled" in caplog.text


def test_unknown_column_names_file(data_copy):
    """Unknown columns raise an error naming the file."""
    _edit(data_copy, "labels", lambda f: f.assign(mystery="1"))
    with pytest.raises(IngestionError) as exc:
        load_panel(data_copy)
    assert "labels.csv" in str(exc.value)


def test_bad_month_names_row(data_copy):
    """An unparseable month raises an error with the file row."""
    def corrupt(frame):
        frame.loc[3, "month"] = "2017-13"
        return frame

    _edit(data_copy, "human_flow", corrupt)
    with pytest.raises(IngestionError) as exc:
        load_panel(data_copy)
    assert exc.value.row == 5


def test_duplicate_listing_rejected(data_copy):
    """The same listing twice in one month is rejected."""
    _edit(data_copy, "listings", lambda f: pd.concat([f, f.iloc[[0]]], ignore_index=True))
    with pytest.raises(IngestionError, match="duplicate"):
        load_panel(data_copy)


def test_negative_label_rejected(data_copy):
    """Labels must be non-negative."""
    def corrupt(frame):
        frame.loc[0, "revenue"] = "-3"
        return frame

    _edit(data_copy, "labels", corrupt)
    with pytest.raises(IngestionError):
        load_panel(data_copy)


def test_schema_mapping_renames(data_copy, tmp_path):
    """Source column names are mapped onto canonical names."""
    _edit(data_copy, "labels", lambda f: f.rename(columns={"revenue": "rev_krw"}))
    mapping = tmp_path / "schema.yaml"
    mapping.write_text("labels:\n  rev_krw: revenue\n")
    panel = load_panel(data_copy, SchemaMapping.from_yaml(mapping))
    assert panel.label_array().shape[-1] == 3


def test_restrict_keeps_sorted_regions(panel):
    """restrict returns a sub-panel over the requested regions."""
    sub = panel.restrict({"D003", "D001"})
    assert sub.regions == ["D001", "D003"]
    assert sub.label_array().shape == (SYNTH_MONTHS, 2, 3)
    np.testing.assert_array_equal(sub.label_array()[:, 0], panel.label_array()[:, 1])


def test_dropped_label_row_rejected(data_copy):
    """A region-month without a label row is an error, never a zero target."""
    _edit(data_copy, "labels", lambda f: f.drop(index=7))
    with pytest.raises(IngestionError) as exc:
        load_panel(data_copy)
    assert "labels.csv" in str(exc.value)
    assert "no label row" in str(exc.value)


def test_empty_label_value_rejected(data_copy):
    """A label row with an empty target names the file row."""
    def corrupt(frame):
        frame.loc[4, "num_reservations"] = None
        return frame

    _edit(data_copy, "labels", corrupt)
    with pytest.raises(IngestionError) as exc:
        load_panel(data_copy)
    assert exc.value.row == 6


@pytest.mark.parametrize("text", ["labels: {rev_krw: revenue\n", "labels: [rev_krw, revenue]\n", "- labels\n"])
def test_malformed_schema_mapping(tmp_path, text):
    mapping = tmp_path / "schema.yaml"
    mapping.write_text(text)
    with pytest.raises(ConfigurationError):
        SchemaMapping.from_yaml(mapping)
