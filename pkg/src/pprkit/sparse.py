"""Sparse score vectors keyed by vertex id."""

from __future__ import annotations

from collections.abc import Mapping
from typing import Iterable, Iterator

import numpy as np


class SparseVector(Mapping):
    """Map vertex id -> positive score, with implicit zeros elsewhere.

    Explicit zeros are never stored.  Instances are treated as immutable once
    handed out; mutation goes through :meth:`add` during construction only.
    """

    __slots__ = ("_data",)

    def __init__(self, entries: Mapping[int, float] | Iterable[tuple[int, float]] | None = None):
        self._data: dict[int, float] = {}
        if entries is None:
            return
        items = entries.items() if isinstance(entries, Mapping) else entries
        for k, v in items:
            v = float(v)
            if v < 0:
                raise ValueError(f"negative score {v} for vertex {k}")
            if v > 0:
                self._data[int(k)] = v

    @classmethod
    def unit(cls, u: int) -> "SparseVector":
        return cls({u: 1.0})

    @classmethod
    def from_arrays(cls, ids: np.ndarray, scores: np.ndarray) -> "SparseVector":
        out = cls()
        out._data = {int(k): float(v) for k, v in zip(ids.tolist(), scores.tolist()) if v > 0}
        return out

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Entries sorted by vertex id as ``(ids int64, scores float64)``."""
        if not self._data:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
        ids = np.fromiter(self._data.keys(), dtype=np.int64, count=len(self._data))
        scores = np.fromiter(self._data.values(), dtype=np.float64, count=len(self._data))
        order = np.argsort(ids, kind="stable")
        return ids[order], scores[order]

    def to_dense(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=np.float64)
        ids, scores = self.to_arrays()
        out[ids] = scores
        return out

    def add(self, k: int, v: float) -> None:
        if v:
            self._data[k] = self._data.get(k, 0.0) + v

    def total(self) -> float:
        return float(sum(self._data.values()))

    def pruned(self, eps: float) -> "SparseVector":
        """Copy without entries strictly below ``eps``."""
        if eps <= 0:
            return self.copy()
        out = SparseVector()
        out._data = {k: v for k, v in self._data.items() if v >= eps}
        return out

    def scaled(self, alpha: float) -> "SparseVector":
        out = SparseVector()
        if alpha > 0:
            out._data = {k: v * alpha for k, v in self._data.items()}
        return out

    def copy(self) -> "SparseVector":
        out = SparseVector()
        out._data = dict(self._data)
        return out

    def max_abs_diff(self, other: Mapping[int, float]) -> float:
        keys = set(self._data) | set(other)
        return max((abs(self.get(k, 0.0) - other.get(k, 0.0)) for k in keys), default=0.0)

    def __getitem__(self, k: int) -> float:
        return self._data[k]

    def __iter__(self) -> Iterator[int]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v:.6g}" for k, v in sorted(self._data.items())[:8])
        more = ", ..." if len(self._data) > 8 else ""
        return f"SparseVector({{{body}{more}}})"


def top_k(v: Mapping[int, float], k: int) -> list[tuple[int, float]]:
    """The ``k`` highest entries, score descending, ties by ascending vertex id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return sorted(v.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
