"""
Embedding backend backed by a remote HTTP service.
"""

import asyncio
import logging
from typing import Optional

import numpy as np

from ..types import BackendKind, EmbeddingError
from ..utils.http import HTTPClient
from .base import EmbeddingBackend


logger = logging.getLogger(__name__)


class HttpBackend(EmbeddingBackend):
    """POSTs {"model", "input"} to {endpoint}/embed and reads {"embedding": [...]}."""

    def __init__(self, endpoint: str, model_id: str, token: str = "", max_concurrency: int = 4,
                 retries: int = 3, timeout: float = 30.0, retry_delay: Optional[float] = None):
        super().__init__(BackendKind.HTTP, model_id)
        self.url = endpoint.rstrip("/") + "/embed"
        self.max_concurrency = max_concurrency
        kwargs = {} if retry_delay is None else {"retry_delay": retry_delay}
        self.http_client = HTTPClient(timeout=timeout, max_connections=max_concurrency,
                                      token=token, retries=retries, **kwargs)
        self._semaphore: Optional[asyncio.Semaphore] = None
        self._opened = False

    async def _ensure_open(self) -> None:
        if not self._opened:
            await self.http_client.__aenter__()
            self._semaphore = asyncio.Semaphore(self.max_concurrency)
            self._opened = True

    async def embed(self, text: str) -> np.ndarray:
        key = text[:40]
        await self._ensure_open()
        async with self._semaphore:
            data = await self.http_client.post_json(self.url, {"model": self.model_id, "input": text}, key=key)
        if not isinstance(data, dict) or "embedding" not in data:
            raise EmbeddingError(key, f"{self.url}: reply has no 'embedding' field")
        return self.validate_vector(data["embedding"], key=key)

    async def aclose(self) -> None:
        if self._opened:
            await self.http_client.close()
            self._opened = False
