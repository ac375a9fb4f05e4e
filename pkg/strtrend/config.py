"""
Experiment configuration: defaults, YAML files, dotted overrides and diffs.
"""

import dataclasses
import logging
import os
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Union

import yaml

from .types import (
    Architecture,
    BackendKind,
    BackendSettings,
    ConfigurationError,
    DataSettings,
    EmbeddingDims,
    ExperimentConfig,
    Modality,
    ModelSettings,
    MODALITY_ORDER,
    TrainSettings,
)


logger = logging.getLogger(__name__)

ENV_ENDPOINT = "STRTREND_EMBED_ENDPOINT"
ENV_MODEL = "STRTREND_EMBED_MODEL"
ENV_TOKEN = "STRTREND_EMBED_TOKEN"

# experiment-section keys that live directly on ExperimentConfig
_EXPERIMENT_KEYS = (
    "window_size", "horizon", "stride", "seed", "split", "loss_weights",
    "modalities", "use_llm_embedding", "label_lag", "repetitions",
)
_SECTIONS = {
    "dims": EmbeddingDims,
    "model": ModelSettings,
    "train": TrainSettings,
    "backend": BackendSettings,
    "data": DataSettings,
}


def default_config() -> ExperimentConfig:
    """Default configuration: 6-month window, 48/48/128/4 dims, seed 43, LSTM."""
    return ExperimentConfig()


def _plain(value: Any) -> Any:
    if isinstance(value, (Architecture, BackendKind, Modality)):
        return value.value
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    return value


def config_to_dict(config: ExperimentConfig) -> Dict[str, Dict[str, Any]]:
    """Nested, YAML-safe representation of a config."""
    experiment = {key: _plain(getattr(config, key)) for key in _EXPERIMENT_KEYS}
    experiment["modalities"] = [m.value for m in config.active_modalities]
    result: Dict[str, Dict[str, Any]] = {"experiment": experiment}
    for section in _SECTIONS:
        values = dataclasses.asdict(getattr(config, section))
        result[section] = {k: _plain(v) for k, v in values.items()}
    result["model"] = {"architecture": config.architecture.value, **result["model"]}
    return result


def _as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    raise ValueError(f"expected true or false, got {value!r}")


def _as_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"expected an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _as_float(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    return float(value)


def _coerce(section: str, key: str, value: Any) -> Any:
    if section == "experiment":
        if key in ("split",):
            return tuple(_as_int(v) for v in value)
        if key == "loss_weights":
            return tuple(_as_float(v) for v in value)
        if key == "modalities":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            return frozenset(Modality(str(v).strip().upper()) for v in (value or []))
        if key == "use_llm_embedding":
            return _as_bool(value)
        return _as_int(value)
    if section == "model" and key == "architecture":
        return Architecture(str(value).upper())
    if section == "backend" and key == "kind":
        return BackendKind(str(value).lower())
    # typed by the field's default; None defaults (data.schema) take any string
    default = getattr(_SECTIONS[section](), key)
    if isinstance(default, bool):
        return _as_bool(value)
    if isinstance(default, int):
        return _as_int(value)
    if isinstance(default, float):
        return _as_float(value)
    if isinstance(default, str):
        if isinstance(value, (Mapping, list)):
            raise ValueError(f"expected a string, got {value!r}")
        return str(value)
    if value is not None and not isinstance(value, str):
        raise ValueError(f"expected a string, got {value!r}")
    return value


def _section(data: Mapping[str, Any], name: str) -> Mapping[str, Any]:
    values = data.get(name) or {}
    if not isinstance(values, Mapping):
        raise ConfigurationError(f"config section {name} must be a mapping, got {type(values).__name__}")
    return values


def config_from_dict(data: Mapping[str, Any], base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Build a config from a nested mapping, starting from `base` (defaults if None)."""
    config = base or default_config()
    data = data or {}
    unknown_sections = set(data) - {"experiment", *_SECTIONS}
    if unknown_sections:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown_sections)}")

    top: Dict[str, Any] = {}
    for key, value in _section(data, "experiment").items():
        if key not in _EXPERIMENT_KEYS:
            raise ConfigurationError(f"unknown config key experiment.{key}")
        try:
            top[key] = _coerce("experiment", key, value)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"invalid value for experiment.{key}: {value!r} ({e})") from e

    for section, cls in _SECTIONS.items():
        values = dict(_section(data, section))
        if section == "model" and "architecture" in values:
            try:
                top["architecture"] = _coerce("model", "architecture", values.pop("architecture"))
            except ValueError as e:
                raise ConfigurationError(f"invalid model.architecture: {e}") from e
        field_names = {f.name for f in dataclasses.fields(cls)}
        updates = {}
        for key, value in values.items():
            if key not in field_names:
                raise ConfigurationError(f"unknown config key {section}.{key}")
            try:
                updates[key] = _coerce(section, key, value)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"invalid value for {section}.{key}: {value!r} ({e})") from e
        if updates:
            top[section] = dataclasses.replace(getattr(config, section), **updates)

    return dataclasses.replace(config, **top)


def apply_env(config: ExperimentConfig, environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
    """Fill empty HTTP backend settings from the environment."""
    environ = os.environ if environ is None else environ
    backend = config.backend
    updates = {}
    if not backend.endpoint and environ.get(ENV_ENDPOINT):
        updates["endpoint"] = environ[ENV_ENDPOINT]
    if not backend.model_id and environ.get(ENV_MODEL):
        updates["model_id"] = environ[ENV_MODEL]
    if not backend.token and environ.get(ENV_TOKEN):
        updates["token"] = environ[ENV_TOKEN]
    if not updates:
        return config
    return dataclasses.replace(config, backend=dataclasses.replace(backend, **updates))


def apply_overrides(config: ExperimentConfig, overrides: Iterable[str]) -> ExperimentConfig:
    """Apply `section.key=value` overrides; values are parsed as YAML scalars."""
    nested: Dict[str, Dict[str, Any]] = {}
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override must look like section.key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        if "." not in dotted:
            raise ConfigurationError(f"override key must be dotted (section.key), got {dotted!r}")
        section, key = dotted.strip().split(".", 1)
        try:
            value = yaml.safe_load(raw) if raw.strip() else ""
        except yaml.YAMLError as e:
            raise ConfigurationError(f"override {dotted}: unparseable value {raw!r}") from e
        nested.setdefault(section, {})[key] = value
    return config_from_dict(nested, base=config)


def load_config(path: Union[str, Path], overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Load a YAML config file, then apply overrides and environment defaults."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"{path}: malformed YAML ({e})") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    config = config_from_dict(data)
    config = apply_overrides(config, overrides)
    config = apply_env(config)
    config.validate()
    return config


def dump_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def save_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    """Write the resolved config; secrets are blanked."""
    data = config_to_dict(config)
    if data["backend"].get("token"):
        data["backend"]["token"] = ""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
    return path


def _flatten(data: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    flat: Dict[str, Any] = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def config_diff(a: ExperimentConfig, b: ExperimentConfig) -> Dict[str, Any]:
    """Dotted keys whose values differ between two configs, mapped to (a, b)."""
    flat_a = _flatten(config_to_dict(a))
    flat_b = _flatten(config_to_dict(b))
    return {
        key: (flat_a.get(key), flat_b.get(key))
        for key in sorted(set(flat_a) | set(flat_b))
        if flat_a.get(key) != flat_b.get(key)
    }


def modality_names(modalities: Iterable[Modality]) -> str:
    """Human-readable modality set, e.g. 'Accessibility + Human Flow'."""
    active = [m for m in MODALITY_ORDER if m in set(modalities)]
    return " + ".join(m.title for m in active) if active else "Label only"
