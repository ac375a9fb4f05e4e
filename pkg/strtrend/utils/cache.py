"""
Content-addressed on-disk store for embedding vectors.

One file per key: a small header followed by little-endian float32 values.
Writes go to a temporary file in the same directory and are renamed into
place, so concurrent writers never leave a partial entry behind.
"""

import hashlib
import logging
import os
import struct
import tempfile
import time
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np


logger = logging.getLogger(__name__)

MAGIC = b"STRE"
VERSION = 1
# magic, version, dim, model-id length, created-at
HEADER = struct.Struct("<4sHIHd")


def prompt_digest(model_id: str, text: str) -> bytes:
    """sha256 over model id, a NUL separator and the prompt text."""
    return hashlib.sha256(model_id.encode("utf-8") + b"\x00" + text.encode("utf-8")).digest()


class EmbeddingCache:
    """Directory of cached embeddings keyed by prompt digest."""

    def __init__(self, root: Union[str, Path], dim: int):
        self.root = Path(root)
        self.dim = dim
        self.root.mkdir(parents=True, exist_ok=True)

    def path_for(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.emb"

    def get(self, key: str) -> Optional[Tuple[str, np.ndarray]]:
        """(model_id, vector) for a key, or None on a miss or a corrupt entry."""
        path = self.path_for(key)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            return None
        try:
            return self._decode(blob)
        except ValueError as e:
            logger.warning("corrupt cache entry %s (%s); treating as miss", path, e)
            return None

    def put(self, key: str, model_id: str, vector: np.ndarray) -> Path:
        path = self.path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        blob = self._encode(model_id, vector)
        fd, tmp = tempfile.mkstemp(prefix=f".{key[:8]}-", suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

    def _encode(self, model_id: str, vector: np.ndarray) -> bytes:
        values = np.asarray(vector, dtype="<f4")
        if values.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {values.shape}")
        name = model_id.encode("utf-8")
        header = HEADER.pack(MAGIC, VERSION, self.dim, len(name), time.time())
        return header + name + values.tobytes()

    def _decode(self, blob: bytes) -> Tuple[str, np.ndarray]:
        if len(blob) < HEADER.size:
            raise ValueError("truncated header")
        magic, version, dim, name_len, _created = HEADER.unpack_from(blob)
        if magic != MAGIC or version != VERSION:
            raise ValueError("bad magic or version")
        if dim != self.dim:
            raise ValueError(f"dimension {dim} != {self.dim}")
        offset = HEADER.size + name_len
        if len(blob) != offset + 4 * dim:
            raise ValueError("truncated payload")
        model_id = blob[HEADER.size:offset].decode("utf-8")
        values = np.frombuffer(blob, dtype="<f4", count=dim, offset=offset).astype(np.float32)
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite values")
        return model_id, values
