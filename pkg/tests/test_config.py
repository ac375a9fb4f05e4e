"""
Tests for configuration loading, overrides and diffs.
"""

import dataclasses
from pathlib import Path

import pytest
import yaml

from strtrend.config import (
    apply_env,
    apply_overrides,
    config_diff,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    modality_names,
    save_config,
)
from strtrend.types import (
    Architecture,
    BackendKind,
    ConfigurationError,
    EmbeddingDims,
    ExperimentConfig,
    Modality,
    ModelSettings,
)


def test_default_config():
    """Defaults: 6-month window, 48/48/128/4 dims, seed 43, LSTM."""
    config = default_config()
    config.validate()
    assert config.window_size == 6
    assert config.dims.as_tuple() == (48, 48, 128, 4)
    assert config.seed == 43
    assert config.architecture is Architecture.LSTM
    assert config.split == (51, 8, 8)


def test_input_dim_follows_modalities():
    """D = active modality widths + label width."""
    assert default_config().input_dim == 228
    assert ExperimentConfig(modalities=frozenset({Modality.HUMAN_FLOW})).input_dim == 52
    assert ExperimentConfig(modalities=frozenset()).input_dim == 4


def test_round_trip_through_dict():
    """config_from_dict(config_to_dict(c)) == c."""
    config = ExperimentConfig(
        window_size=9,
        dims=EmbeddingDims(64, 48, 128, 4),
        architecture=Architecture.TRANSFORMER,
        modalities=frozenset({Modality.AIRBNB, Modality.ACCESSIBILITY}),
        loss_weights=(2.0, 1.0, 0.5),
    )
    assert config_from_dict(config_to_dict(config)) == config


def test_overrides_parse_yaml_scalars():
    """Dotted overrides are applied with YAML scalar parsing."""
    config = apply_overrides(default_config(), [
        "model.architecture=TRANSFORMER",
        "experiment.window_size=12",
        "train.learning_rate=0.0005",
        "experiment.modalities=[HUMAN_FLOW]",
    ])
    assert config.architecture is Architecture.TRANSFORMER
    assert config.window_size == 12
    assert config.train.learning_rate == pytest.approx(5e-4)
    assert config.modalities == frozenset({Modality.HUMAN_FLOW})


@pytest.mark.parametrize("override", ["model.nope=1", "nosection.key=1", "window_size=3", "model.hidden_size"])
def test_bad_overrides_raise(override):
    """Unknown keys and malformed overrides are configuration errors."""
    with pytest.raises(ConfigurationError):
        apply_overrides(default_config(), [override])


@pytest.mark.parametrize("changes", [
    {"window_size": 0},
    {"horizon": 4},
    {"loss_weights": (0.0, 0.0, 0.0)},
    {"loss_weights": (-1.0, 1.0, 1.0)},
    {"dims": EmbeddingDims(0, 48, 128, 4)},
    {"model": ModelSettings(hidden_size=30, num_heads=4)},
])
def test_validate_rejects(changes):
    """Invalid settings raise ConfigurationError."""
    with pytest.raises(ConfigurationError):
        dataclasses.replace(default_config(), **changes).validate()


def test_env_fills_http_backend():
    """Environment variables fill empty backend settings only."""
    env = {"STRTREND_EMBED_ENDPOINT": "http://embed:8080", "STRTREND_EMBED_MODEL": "m", "STRTREND_EMBED_TOKEN": "t"}
    config = apply_env(default_config(), env)
    assert config.backend.endpoint == "http://embed:8080"
    assert config.backend.model_id == "m"
    assert config.backend.token == "t"

    preset = apply_overrides(default_config(), ["backend.model_id=fixed"])
    assert apply_env(preset, env).backend.model_id == "fixed"


def test_load_and_save_config(tmp_path):
    """A saved config reloads to the same values, with the token blanked."""
    config = apply_overrides(default_config(), ["backend.kind=hash", "backend.token=secret", "experiment.seed=7"])
    path = save_config(config, tmp_path / "run" / "config.yaml")
    assert yaml.safe_load(path.read_text())["backend"]["token"] == ""

    loaded = load_config(path)
    assert loaded.seed == 7
    assert loaded.backend.kind is BackendKind.HASH


def test_load_config_missing_file(tmp_path):
    """A missing file surfaces as FileNotFoundError."""
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.cfg")


def test_config_diff():
    """Only changed dotted keys appear in the diff."""
    base = default_config()
    other = dataclasses.replace(base, window_size=9, architecture=Architecture.RNN)
    assert set(config_diff(base, other)) == {"experiment.window_size", "model.architecture"}
    assert config_diff(base, base) == {}


def test_modality_names():
    """Names follow canonical order."""
    assert modality_names({Modality.AIRBNB, Modality.ACCESSIBILITY}) == "Accessibility + Airbnb"
    assert modality_names(set()) == "Label only"


CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def clean_env(monkeypatch):
    """Remove embedding-service variables from the environment."""
    for name in ("STRTREND_EMBED_ENDPOINT", "STRTREND_EMBED_MODEL", "STRTREND_EMBED_TOKEN"):
        monkeypatch.delenv(name, raising=False)


def test_shipped_default_matches_code(clean_env):
    assert load_config(CONFIGS / "default.yaml") == default_config()


def test_shipped_synthetic_config(clean_env):
    config = load_config(CONFIGS / "synthetic.yaml")
    assert config_diff(default_config(), config) == {
        "data.select_active": (True, False),
        "experiment.split": ([51, 8, 8], [24, 6, 6]),
        "model.ff_size": (256, 64),
        "model.hidden_size": (128, 32),
        "model.num_heads": (4, 2),
        "model.num_layers": (2, 1),
        "train.max_epochs": (500, 200),
    }


@pytest.mark.parametrize("text, expected", [
    ("experiment:\n  use_llm_embedding: 'false'\n", False),
    ("experiment:\n  use_llm_embedding: 'True'\n", True),
    ("experiment:\n  use_llm_embedding: false\n", False),
])
def test_quoted_booleans_parse(tmp_path, text, expected):
    """Quoted true/false strings are read as booleans, not as truthy text."""
    path = tmp_path / "bools.yaml"
    path.write_text(text)
    assert load_config(path).use_llm_embedding is expected


@pytest.mark.parametrize("override", [
    "experiment.use_llm_embedding=maybe",
    "experiment.use_llm_embedding=1",
    "data.select_active=yes please",
    "model.hidden_size=abc",
    "model.hidden_size=[1, 2]",
    "experiment.window_size=6.5",
    "train.learning_rate={a: 1}",
    "experiment.seed=[unclosed",
])
def test_mistyped_overrides_raise(override):
    """Values of the wrong type are configuration errors, never tracebacks."""
    with pytest.raises(ConfigurationError):
        apply_overrides(default_config(), [override])


def test_string_overrides_keep_field_types():
    """Section fields are coerced to the type of their defaults."""
    config = apply_overrides(default_config(), ["data.select_active='false'", "backend.timeout=5", "model.num_layers=3.0"])
    assert config.data.select_active is False
    assert config.backend.timeout == 5.0 and isinstance(config.backend.timeout, float)
    assert config.model.num_layers == 3 and isinstance(config.model.num_layers, int)


@pytest.mark.parametrize("text", [
    "experiment: [window_size, 6]\n",
    "model: just-a-string\n",
    "model: {hidden_size: 16\n",
])
def test_malformed_yaml_raises(tmp_path, text):
    """Broken YAML and non-mapping sections become configuration errors."""
    path = tmp_path / "broken.yaml"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        load_config(path)
