"""
HTTP utilities for JSON requests with connection pooling and retries.
"""

import asyncio
import logging
from typing import Any, Dict, Optional

import aiohttp

from ..types import EmbeddingError


logger = logging.getLogger(__name__)

BASE_RETRY_DELAY = 0.1


class HTTPClient:
    """HTTP client with connection pooling and retry logic."""

    def __init__(self, timeout: float = 30.0, max_connections: int = 4,
                 token: str = "", retries: int = 3, retry_delay: float = BASE_RETRY_DELAY):
        self.timeout = aiohttp.ClientTimeout(total=timeout)
        self.max_connections = max_connections
        self.token = token
        self.retries = retries
        self.retry_delay = retry_delay
        self.session: Optional[aiohttp.ClientSession] = None

    async def __aenter__(self) -> "HTTPClient":
        headers = {"Accept": "application/json", "Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        connector = aiohttp.TCPConnector(limit=self.max_connections, limit_per_host=self.max_connections)
        self.session = aiohttp.ClientSession(connector=connector, timeout=self.timeout, headers=headers)
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb) -> None:
        await self.close()

    async def close(self) -> None:
        if self.session:
            await self.session.close()
            self.session = None

    async def post_json(self, url: str, payload: Dict[str, Any], key: str = "") -> Any:
        """POST a JSON body and decode the JSON reply.

        Network errors, timeouts and non-2xx replies are retried with
        exponential backoff; the last failure is raised as EmbeddingError.
        """
        if not self.session:
            raise RuntimeError("HTTPClient not initialized. Use async context manager.")

        last_error = "no attempt made"
        for attempt in range(self.retries):
            try:
                async with self.session.post(url, json=payload) as response:
                    if response.status >= 300:
                        body = (await response.text())[:200]
                        raise aiohttp.ClientResponseError(
                            request_info=response.request_info,
                            history=response.history,
                            status=response.status,
                            message=f"Request failed with status {response.status}: {body}",
                        )
                    return await response.json(content_type=None)
            except asyncio.TimeoutError:
                last_error = "request timed out"
            except (aiohttp.ClientError, ValueError) as e:
                last_error = str(e) or e.__class__.__name__

            if attempt + 1 < self.retries:
                delay = self.retry_delay * (2 ** attempt)
                logger.debug("POST %s failed (%s), retrying in %.2fs", url, last_error, delay)
                await asyncio.sleep(delay)

        raise EmbeddingError(key, f"POST {url} failed after {self.retries} attempts: {last_error}")
