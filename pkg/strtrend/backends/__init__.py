"""Embedding backends for prompt text."""

from typing import Union

from ..types import BackendKind, BackendSettings, ConfigurationError
from .base import EmbeddingBackend
from .hash import HashBackend
from .http import HttpBackend
from .numeric import NumericBackend


def map_backend_name(name: Union[str, BackendKind]) -> BackendKind:
    """Map the accepted spellings of a backend name to BackendKind."""
    if isinstance(name, BackendKind):
        return name
    lower = (name or "").strip().lower()
    if lower in ("hash", "text-hash", "random"):
        return BackendKind.HASH
    if lower in ("numeric", "num", "numbers"):
        return BackendKind.NUMERIC
    if lower in ("http", "https", "remote", "api"):
        return BackendKind.HTTP
    raise ConfigurationError(f"unknown embedding backend: {name!r}")


def create_backend(settings: BackendSettings) -> EmbeddingBackend:
    kind = map_backend_name(settings.kind)
    if kind is BackendKind.HASH:
        return HashBackend(settings.model_id)
    if kind is BackendKind.NUMERIC:
        return NumericBackend(settings.model_id)
    if not settings.endpoint:
        raise ConfigurationError("backend.endpoint is required for the http backend")
    return HttpBackend(
        settings.endpoint,
        settings.model_id or "remote",
        token=settings.token,
        max_concurrency=settings.max_concurrency,
        retries=settings.retries,
        timeout=settings.timeout,
    )


__all__ = [
    "EmbeddingBackend",
    "HashBackend",
    "NumericBackend",
    "HttpBackend",
    "create_backend",
    "map_backend_name",
]
