"""Embedding vectors and cosine similarity."""

import asyncio
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import (
    BackendUnavailableError, DimensionMismatchError, GatewayError, TransientBackendError,
    ValidationError, ZeroVectorError,
)
from ..core.interfaces import EmbeddingBackend
from ..core.metrics import MetricsRegistry
from ..gateway.retry import RetryPolicy, call_with_retry


@dataclass(frozen=True)
class EmbeddingVector:
    source_id: str
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values or not any(self.values):
            raise ZeroVectorError(self.source_id)

    @property
    def dim(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def to_dict(self) -> Dict[str, object]:
        return {"id": self.source_id, "dim": self.dim, "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "EmbeddingVector":
        vector = cls(str(data["id"]), tuple(data["values"]))
        if "dim" in data and int(data["dim"]) != vector.dim:
            raise DimensionMismatchError(int(data["dim"]), vector.dim)
        return vector


def cosine_similarity(u: EmbeddingVector, w: EmbeddingVector) -> float:
    """(u·w) / (‖u‖‖w‖), clipped into [-1, 1].

    Raises:
        DimensionMismatchError: vectors of different length
    """
    if u.dim != w.dim:
        raise DimensionMismatchError(u.dim, w.dim)
    a, b = u.array(), w.array()
    value = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return min(1.0, max(-1.0, value))


async def embed(backend: EmbeddingBackend, text: str, text_id: str = "",
                retry: Optional[RetryPolicy] = None) -> EmbeddingVector:
    """Embed one text.

    Raises:
        ValidationError: empty text
        ZeroVectorError: backend returned an all-zero vector
        DimensionMismatchError: length differs from the backend's dim
        BackendUnavailableError: still failing after retries
    """
    if not text or not text.strip():
        raise ValidationError("Text cannot be empty", details={"text_id": text_id})
    policy = retry or RetryPolicy()
    try:
        values = await call_with_retry(lambda: backend.embed_text(text), policy,
                                       label=f"{backend.name}/{text_id}")
    except TransientBackendError as e:
        raise BackendUnavailableError(backend.name, e.message) from e
    if backend.dim and len(values) != backend.dim:
        raise DimensionMismatchError(backend.dim, len(values))
    return EmbeddingVector(text_id, tuple(values))


async def embed_all(backend: EmbeddingBackend, items: Sequence[Tuple[str, str]],
                    max_in_flight: int = 4, retry: Optional[RetryPolicy] = None,
                    metrics: Optional[MetricsRegistry] = None) -> Dict[str, EmbeddingVector]:
    """Embed (id, text) pairs; the result keeps the input order."""
    semaphore = asyncio.Semaphore(max(1, max_in_flight))

    async def one(item_id: str, text: str) -> EmbeddingVector:
        async with semaphore:
            if metrics:
                metrics.increment("backend_calls", backend=backend.name)
            try:
                return await embed(backend, text, item_id, retry)
            except GatewayError:
                if metrics:
                    metrics.increment("backend_failures", backend=backend.name)
                raise

    vectors = await asyncio.gather(*(one(i, t) for i, t in items))
    return {v.source_id: v for v in vectors}


class EmbeddingStore:
    """`{id, dim, values}` per line."""

    def __init__(self, path: Path):
        self.path = Path(path)

    def exists(self) -> bool:
        return self.path.exists()

    def write(self, vectors: Iterable[EmbeddingVector]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            for vector in vectors:
                f.write(json.dumps(vector.to_dict(), sort_keys=True) + "\n")

    def read(self) -> Dict[str, EmbeddingVector]:
        vectors: Dict[str, EmbeddingVector] = {}
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    vector = EmbeddingVector.from_dict(json.loads(line))
                    vectors[vector.source_id] = vector
        return vectors
