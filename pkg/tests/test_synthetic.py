"""
Tests for the synthetic dataset generator.
"""

import filecmp

import numpy as np
import pandas as pd
import pytest

from strtrend.data.ingest import load_panel
from strtrend.data.schema import TABLE_FILES
from strtrend.data.synthetic import SyntheticSpec, generate_synthetic, synthetic_parameters
from strtrend.types import ConfigurationError


def test_same_seed_same_bytes(tmp_path):
    """Two runs with one seed write byte-identical files."""
    generate_synthetic(5, 15, 11, tmp_path / "a")
    generate_synthetic(5, 15, 11, tmp_path / "b")
    for name in TABLE_FILES.values():
        assert filecmp.cmp(tmp_path / "a" / name, tmp_path / "b" / name, shallow=False)


def test_different_seed_differs(tmp_path):
    """Changing the seed changes the labels."""
    generate_synthetic(5, 15, 1, tmp_path / "a")
    generate_synthetic(5, 15, 2, tmp_path / "b")
    assert not filecmp.cmp(tmp_path / "a" / "labels.csv", tmp_path / "b" / "labels.csv", shallow=False)


def test_noise_free_labels_follow_closed_form(tmp_path):
    """Without noise or flow coupling, labels equal trend + seasonality."""
    spec = SyntheticSpec(noise_scale=0.0, flow_coefficient=0.0)
    generate_synthetic(4, 15, 5, tmp_path, spec)
    params = synthetic_parameters(4, 15, 5, spec)
    panel = load_panel(tmp_path)
    labels = panel.label_array()
    for r in range(4):
        for m in range(15):
            base = params.base(r, m)
            expected = (base, params.price[r] * base, base / params.stay[r])
            np.testing.assert_allclose(labels[m, r], expected, rtol=1e-5, atol=1e-5)


def test_flow_variables_lead_labels(tmp_path):
    """Designated human-flow variables carry the driver three months ahead."""
    spec = SyntheticSpec()
    generate_synthetic(4, 15, 9, tmp_path, spec)
    params = synthetic_parameters(4, 15, 9, spec)
    flow = pd.read_csv(tmp_path / "human_flow.csv")
    region = flow[flow["region"] == "D001"]["pop_20s_male"].to_numpy()
    driver = params.driver[1, spec.flow_lead:spec.flow_lead + 15]
    ratio = region / region.mean()
    assert np.corrcoef(ratio, driver)[0, 1] > 0.99


def test_schema_compatible(tmp_path):
    """Generated files load through the regular ingestion path."""
    generate_synthetic(6, 15, 3, tmp_path)
    panel = load_panel(tmp_path)
    assert panel.n_months == 15
    assert len(panel.regions) == 6
    assert (panel.label_array() >= 0).all()


@pytest.mark.parametrize("regions,months", [(3, 20), (5, 11)])
def test_too_small_rejected(tmp_path, regions, months):
    """At least four regions and window + horizon + 3 months."""
    with pytest.raises(ConfigurationError):
        generate_synthetic(regions, months, 0, tmp_path)
