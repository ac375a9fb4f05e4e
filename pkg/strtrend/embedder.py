"""
Cached prompt embedding.
"""

import asyncio
import logging
import threading
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .backends.base import EmbeddingBackend
from .events import PipelineEventEmitter
from .prompts import Prompt
from .types import EMBEDDING_DIM, EmbeddingError
from .utils.cache import EmbeddingCache, prompt_digest


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    model_id: str
    prompt_digest: str


def prompt_key(model_id: str, text: str) -> str:
    return prompt_digest(model_id, text).hex()


async def embed_cached(prompt: Union[Prompt, str], backend: EmbeddingBackend, cache: Optional[EmbeddingCache] = None,
                       events: Optional[PipelineEventEmitter] = None) -> EmbeddingVector:
    """Embed one prompt, reading and filling the cache.

    The backend is called only on a miss; its failure is re-raised as
    EmbeddingError keyed by the prompt digest.
    """
    text = prompt.text if isinstance(prompt, Prompt) else prompt
    key = prompt_key(backend.model_id, text)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None and hit[0] == backend.model_id:
            if events:
                events.emit("cache_hit", key)
            return EmbeddingVector(hit[1], hit[0], key)
    if events:
        events.emit("cache_miss", key)
    try:
        values = backend.validate_vector(await backend.embed(text), key=key)
    except EmbeddingError as e:
        if events:
            events.emit("embed_error", key, str(e))
        e.prompt_key = key
        raise
    except Exception as e:
        if events:
            events.emit("embed_error", key, str(e))
        raise EmbeddingError(key, f"{backend.model_id}: {e}") from e
    if cache is not None:
        cache.put(key, backend.model_id, values)
    return EmbeddingVector(values, backend.model_id, key)


class PromptEmbedder:
    """Embeds prompts through a backend with a shared on-disk cache.

    Texts already embedded by this instance are served from memory.
    """

    def __init__(self, backend: EmbeddingBackend, cache: Optional[EmbeddingCache] = None,
                 events: Optional[PipelineEventEmitter] = None):
        self.backend = backend
        self.cache = cache
        self.events = events or PipelineEventEmitter()
        self._lock = threading.Lock()
        self._memo: Dict[str, np.ndarray] = {}

    async def embed(self, text: str) -> EmbeddingVector:
        key = prompt_key(self.backend.model_id, text)
        with self._lock:
            memo = self._memo.get(key)
        if memo is not None:
            self.events.emit("cache_hit", key)
            return EmbeddingVector(memo, self.backend.model_id, key)
        vector = await embed_cached(text, self.backend, self.cache, self.events)
        with self._lock:
            self._memo[key] = vector.values
        return vector

    async def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        """(len(texts), EMBEDDING_DIM) float32 matrix; duplicates share one backend call."""
        unique = list(dict.fromkeys(texts))
        semaphore = asyncio.Semaphore(self.backend.max_concurrency)

        async def one(text: str) -> np.ndarray:
            async with semaphore:
                return (await self.embed(text)).values

        vectors = await asyncio.gather(*(one(t) for t in unique))
        lookup = dict(zip(unique, vectors))
        if not texts:
            return np.zeros((0, EMBEDDING_DIM), dtype=np.float32)
        return np.stack([lookup[t] for t in texts]).astype(np.float32)

    async def embed_prompts(self, prompts: Sequence[Prompt]) -> List[EmbeddingVector]:
        matrix = await self.embed_texts([p.text for p in prompts])
        return [
            EmbeddingVector(row, self.backend.model_id, prompt_key(self.backend.model_id, p.text))
            for row, p in zip(matrix, prompts)
        ]

    def embed_texts_sync(self, texts: Sequence[str]) -> np.ndarray:
        """Blocking wrapper for callers outside an event loop."""
        async def run() -> np.ndarray:
            try:
                return await self.embed_texts(texts)
            finally:
                await self.backend.aclose()

        return asyncio.run(run())
