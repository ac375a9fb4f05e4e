"""
Pseudo-embeddings that expose the numbers printed in a prompt.
"""

import re

import numpy as np

from ..types import EMBEDDING_DIM, BackendKind
from .base import EmbeddingBackend
from .hash import hash_vector


# A minus sign only counts when it does not follow a word character,
# so "2017-03" yields 2017 and 3.
NUMBER = re.compile(r"(?<![\w.])-?\d+(?:\.\d+)?")


def extract_numbers(text: str) -> np.ndarray:
    return np.array([float(m.group()) for m in NUMBER.finditer(text)], dtype=np.float64)


def numeric_vector(text: str, dim: int = EMBEDDING_DIM) -> np.ndarray:
    """sign(x)*log1p(|x|) of the printed numbers in the leading dims, the text hash after."""
    vector = hash_vector(text, dim).astype(np.float64)
    numbers = extract_numbers(text)[:dim]
    vector[: len(numbers)] = np.sign(numbers) * np.log1p(np.abs(numbers))
    return vector.astype(np.float32)


class NumericBackend(EmbeddingBackend):
    """Backend whose vectors are a monotone transform of the prompt's numbers.

    Prompts of one kind share a fixed line layout, so the same dimension
    always carries the same variable.
    """

    max_concurrency = 64

    def __init__(self, model_id: str = "numeric-v1"):
        super().__init__(BackendKind.NUMERIC, model_id or "numeric-v1")

    async def embed(self, text: str) -> np.ndarray:
        return self.validate_vector(numeric_vector(text), key=text[:40])
