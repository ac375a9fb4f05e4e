"""
Deterministic pseudo-embeddings derived from a hash of the prompt text.
"""

import hashlib

import numpy as np

from ..types import EMBEDDING_DIM, BackendKind
from .base import EmbeddingBackend


def hash_vector(text: str, dim: int = EMBEDDING_DIM) -> np.ndarray:
    """Unit-norm Gaussian vector seeded by sha256(text)."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    key = int.from_bytes(digest[:16], "little")
    rng = np.random.Generator(np.random.Philox(key=key))
    vector = rng.standard_normal(dim)
    return (vector / np.linalg.norm(vector)).astype(np.float32)


class HashBackend(EmbeddingBackend):
    """Text-hash backend: stable across runs, carries no numeric signal."""

    max_concurrency = 64

    def __init__(self, model_id: str = "hash-v1"):
        super().__init__(BackendKind.HASH, model_id or "hash-v1")

    async def embed(self, text: str) -> np.ndarray:
        return self.validate_vector(hash_vector(text), key=text[:40])
