"""
Shared fixtures: a small synthetic dataset and a fast experiment config.
"""

import dataclasses

import pytest

from strtrend.data.ingest import load_panel
from strtrend.data.synthetic import generate_synthetic
from strtrend.types import BackendKind, BackendSettings, DataSettings, ExperimentConfig, ModelSettings, TrainSettings


SYNTH_REGIONS = 8
SYNTH_MONTHS = 24


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    """Synthetic tables for 8 regions x 24 months, seed 7."""
    out = tmp_path_factory.mktemp("synthetic")
    generate_synthetic(SYNTH_REGIONS, SYNTH_MONTHS, 7, out)
    return out


@pytest.fixture(scope="session")
def panel(synthetic_dir):
    """The synthetic tables loaded as a panel."""
    return load_panel(synthetic_dir)


@pytest.fixture
def fast_config(tmp_path):
    """Small model, few epochs, all regions, (16, 4, 4) split."""
    return ExperimentConfig(
        window_size=3,
        split=(16, 4, 4),
        model=ModelSettings(hidden_size=16, num_layers=1, num_heads=2, ff_size=32),
        train=TrainSettings(max_epochs=3, patience=2),
        backend=BackendSettings(kind=BackendKind.NUMERIC, cache_dir=str(tmp_path / "cache")),
        data=DataSettings(select_active=False),
    )


def with_changes(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return dataclasses.replace(config, **changes)


def sampled_gradient_check(module, loss_fn, samples: int = 10, eps: float = 1e-4, rtol: float = 1e-4,
                           seed: int = 0) -> None:
    """Compare autograd gradients of loss_fn() with central differences on sampled parameter entries.

    The module must already be in double precision.
    """
    import torch

    generator = torch.Generator().manual_seed(seed)
    params = [p for p in module.parameters() if p.requires_grad]
    module.zero_grad()
    loss_fn().backward()
    for _ in range(samples):
        param = params[int(torch.randint(len(params), (1,), generator=generator))]
        flat = param.data.view(-1)
        i = int(torch.randint(flat.numel(), (1,), generator=generator))
        analytic = float(param.grad.view(-1)[i])
        original = float(flat[i])
        with torch.no_grad():
            flat[i] = original + eps
            up = float(loss_fn())
            flat[i] = original - eps
            down = float(loss_fn())
            flat[i] = original
        numeric = (up - down) / (2 * eps)
        assert abs(numeric - analytic) <= rtol * max(1.0, abs(analytic)), (numeric, analytic)
