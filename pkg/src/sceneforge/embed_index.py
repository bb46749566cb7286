"""Deterministic local text embedding and an exact top-k cosine index.

The local embedder hashes character trigrams of the lowercased text into
D=256 signed buckets (FNV-1a 64-bit, fixed seed below) and L2-normalizes.
It is a deterministic offline stand-in for a remote embedding service; both
satisfy the same unit-norm contract, so indexes built from either are
interchangeable.

Search is an exhaustive cosine scan: exact ranking, ties broken by insertion
position. Indexes are immutable after construction and persist to a compact
little-endian binary format (magic ``VIDX1``).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, StageError

LOCAL_DIMENSION = 256
# Fixed hash seed: changing it changes every persisted index and is a
# format-breaking event.
HASH_SEED = 0x53464F52_47453031

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

MAGIC = b"VIDX1"


class DegenerateTextError(StageError):
    """Text produced an all-zero vector (empty or shorter than a trigram)."""

    stage = "embed"


class DimensionMismatchError(StageError):
    stage = "index"


class EmptyIndexError(StageError):
    stage = "index"


class FormatError(ConfigurationError):
    """Persisted index bytes are corrupt or inconsistent."""


def _fnv1a64(data: bytes, seed: int) -> int:
    h = (_FNV_OFFSET ^ seed) & _MASK64
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def embed_local(text: str, dimension: int = LOCAL_DIMENSION) -> np.ndarray:
    """Embed text deterministically; identical text gives a bitwise-equal vector."""
    lowered = text.lower()
    vec = np.zeros(dimension, dtype=np.float64)
    for i in range(len(lowered) - 2):
        h = _fnv1a64(lowered[i:i + 3].encode("utf-8"), HASH_SEED)
        bucket = h % dimension
        sign = 1.0 if (h >> 32) & 1 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise DegenerateTextError(f"text {text!r} embeds to the zero vector")
    return (vec / norm).astype(np.float32)


def normalize(values: Sequence[float]) -> np.ndarray:
    """Unit-normalize an externally produced vector (remote embeddings)."""
    vec = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateTextError("cannot normalize a zero or non-finite vector")
    return (vec / norm).astype(np.float32)


@dataclass(frozen=True)
class IndexRecord:
    id: str
    vector: np.ndarray


class VectorIndex:
    """Immutable exact-search index over unit vectors."""

    def __init__(self, records: Iterable[IndexRecord]):
        records = list(records)
        ids = [r.id for r in records]
        if len(set(ids)) != len(ids):
            raise FormatError("duplicate record ids in index")
        self.ids: tuple[str, ...] = tuple(ids)
        if records:
            self.dimension = int(records[0].vector.shape[0])
            for r in records:
                if r.vector.shape != (self.dimension,):
                    raise DimensionMismatchError(
                        f"record {r.id!r} has dimension {r.vector.shape[0]}, index has {self.dimension}"
                    )
            self._matrix = np.stack([r.vector.astype(np.float32) for r in records])
        else:
            self.dimension = 0
            self._matrix = np.zeros((0, 0), dtype=np.float32)

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def build(cls, items: Iterable[tuple[str, str]], embedder=embed_local) -> "VectorIndex":
        """Build from (id, text) pairs with the given embedder."""
        return cls(IndexRecord(key, embedder(text)) for key, text in items)

    def vector_for(self, position: int) -> np.ndarray:
        return self._matrix[position]

    def search(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Top-k by cosine similarity, descending; ties keep insertion order."""
        if len(self.ids) == 0:
            raise EmptyIndexError("search on an empty index")
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        query = np.asarray(query, dtype=np.float32)
        if query.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"query dimension {query.shape} does not match index dimension {self.dimension}"
            )
        scores = self._matrix @ query
        order = np.argsort(-scores, kind="stable")[:k]
        return [(self.ids[i], float(scores[i])) for i in order]

    # -- persistence -----------------------------------------------------------

    def save(self) -> bytes:
        out = bytearray()
        out += MAGIC
        out += struct.pack("<II", self.dimension, len(self.ids))
        for i, key in enumerate(self.ids):
            encoded = key.encode("utf-8")
            out += struct.pack("<I", len(encoded))
            out += encoded
            out += self._matrix[i].astype("<f4").tobytes()
        return bytes(out)

    @classmethod
    def load(cls, blob: bytes) -> "VectorIndex":
        if blob[: len(MAGIC)] != MAGIC:
            raise FormatError("bad magic bytes")
        offset = len(MAGIC)
        try:
            dimension, count = struct.unpack_from("<II", blob, offset)
            offset += 8
            records = []
            for _ in range(count):
                (id_len,) = struct.unpack_from("<I", blob, offset)
                offset += 4
                key = blob[offset:offset + id_len].decode("utf-8")
                if len(blob) < offset + id_len:
                    raise FormatError("truncated id")
                offset += id_len
                raw = blob[offset:offset + 4 * dimension]
                if len(raw) < 4 * dimension:
                    raise FormatError("truncated vector data")
                offset += 4 * dimension
                records.append(IndexRecord(key, np.frombuffer(raw, dtype="<f4").copy()))
        except struct.error as exc:
            raise FormatError(f"truncated index: {exc}") from exc
        if offset != len(blob):
            raise FormatError(f"{len(blob) - offset} trailing bytes after records")
        index = cls(records)
        if count and index.dimension != dimension:
            raise FormatError("header dimension disagrees with records")
        return index


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b))
