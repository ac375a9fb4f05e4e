"""
Base class for all embedding backends.
"""

import asyncio
from abc import ABC, abstractmethod
from typing import List, Optional, Sequence

import numpy as np

from ..types import EMBEDDING_DIM, BackendKind, EmbeddingError, EmbeddingShapeError


class EmbeddingBackend(ABC):
    """Abstract base class for prompt embedding backends.

    A backend maps prompt text to EMBEDDING_DIM reals; the same text must map
    to the same vector for a given instance and model id.
    """

    max_concurrency: int = 1

    def __init__(self, kind: BackendKind, model_id: str):
        self.kind = kind
        self.model_id = model_id

    def validate_vector(self, values, key: str = "") -> np.ndarray:
        """Check length and finiteness; return the vector as float32."""
        try:
            vector = np.asarray(values, dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise EmbeddingError(key, f"{self.model_id}: embedding is not numeric ({e})") from e
        if vector.ndim != 1 or vector.shape[0] != EMBEDDING_DIM:
            raise EmbeddingShapeError(
                key, f"{self.model_id}: expected {EMBEDDING_DIM} values, got shape {vector.shape}"
            )
        if not np.all(np.isfinite(vector)):
            raise EmbeddingError(key, f"{self.model_id}: embedding contains non-finite values")
        return vector.astype(np.float32)

    @abstractmethod
    async def embed(self, text: str) -> np.ndarray:
        """Embed one prompt."""
        pass

    async def embed_many(self, texts: Sequence[str], limit: Optional[int] = None) -> List[np.ndarray]:
        """Embed several prompts with at most `limit` requests in flight."""
        semaphore = asyncio.Semaphore(limit or self.max_concurrency)

        async def one(text: str) -> np.ndarray:
            async with semaphore:
                return await self.embed(text)

        return list(await asyncio.gather(*(one(t) for t in texts)))

    async def aclose(self) -> None:
        """Release transport resources, if any."""
        return None
