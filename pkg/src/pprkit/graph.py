"""Immutable directed graph in compressed sparse row (CSR) form.

Vertex ids are taken verbatim from the input; ids that never appear in an
edge still exist as isolated dangling vertices.  Parallel edges are kept, so
the uniform choice over a neighbor list is multiplicity-weighted.
"""

from __future__ import annotations

import gzip
import io
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable, TextIO

import numpy as np


class GraphParseError(ValueError):
    """Raised for malformed edge-list input; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    indptr: np.ndarray
    indices: np.ndarray
    _dangling: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        if indptr.ndim != 1 or indptr.size < 1 or indptr[0] != 0:
            raise ValueError("indptr must be a 1-d array starting at 0")
        if np.any(np.diff(indptr) < 0) or indptr[-1] != indices.size:
            raise ValueError("indptr is inconsistent with indices")
        n = indptr.size - 1
        if indices.size and (indices.min() < 0 or indices.max() >= n):
            raise ValueError("neighbor id out of range")
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        dangling = np.flatnonzero(np.diff(indptr) == 0)
        dangling.setflags(write=False)
        object.__setattr__(self, "_dangling", dangling)

    @classmethod
    def from_edges(cls, src: Iterable[int], dst: Iterable[int], num_vertices: int | None = None) -> "Graph":
        """Build the canonical CSR form (neighbor lists sorted ascending)."""
        src = np.asarray(list(src) if not isinstance(src, np.ndarray) else src, dtype=np.int64)
        dst = np.asarray(list(dst) if not isinstance(dst, np.ndarray) else dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")
        if src.size and min(src.min(), dst.min()) < 0:
            raise ValueError("vertex ids must be non-negative")
        inferred = int(max(src.max(), dst.max())) + 1 if src.size else 0
        n = inferred if num_vertices is None else int(num_vertices)
        if n < inferred:
            raise ValueError(f"num_vertices={n} but edges reference vertex {inferred - 1}")
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(indptr, dst[order])

    @property
    def num_vertices(self) -> int:
        return self.indptr.size - 1

    @property
    def num_edges(self) -> int:
        return int(self.indices.size)

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def dangling(self) -> np.ndarray:
        """Sorted ids of vertices with out-degree 0."""
        return self._dangling

    def _check(self, u: int) -> int:
        u = int(u)
        if not 0 <= u < self.num_vertices:
            raise IndexError(f"vertex {u} out of range [0, {self.num_vertices})")
        return u

    def out_degree(self, u: int) -> int:
        u = self._check(u)
        return int(self.indptr[u + 1] - self.indptr[u])

    def out_neighbors(self, u: int) -> np.ndarray:
        """Sorted out-neighbor ids of ``u`` (a read-only view; may be empty)."""
        u = self._check(u)
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def is_dangling(self, u: int) -> bool:
        return self.out_degree(u) == 0

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        src = np.repeat(np.arange(self.num_vertices, dtype=np.int64), self.out_degrees)
        return src, self.indices.copy()

    def reachable_from(self, u: int) -> np.ndarray:
        """Boolean mask of vertices reachable from ``u`` (including ``u``)."""
        u = self._check(u)
        seen = np.zeros(self.num_vertices, dtype=bool)
        seen[u] = True
        frontier = np.array([u])
        while frontier.size:
            nbrs = np.concatenate([self.indices[self.indptr[w]:self.indptr[w + 1]] for w in frontier])
            nbrs = np.unique(nbrs)
            frontier = nbrs[~seen[nbrs]]
            seen[frontier] = True
        return seen

    def __repr__(self) -> str:
        return f"Graph(N={self.num_vertices}, M={self.num_edges}, dangling={self._dangling.size})"


def degree_bucket(g: Graph, u: int, num_buckets: int) -> int | None:
    """Log2 out-degree bucket in ``[1, num_buckets]``; ``None`` for out-degree 0.

    Bucket ``i < B`` holds degrees in ``[2**(i-1), 2**i)``; bucket ``B`` holds
    everything from ``2**(B-1)`` up.
    """
    if num_buckets < 1:
        raise ValueError("num_buckets must be >= 1")
    d = g.out_degree(u)
    if d == 0:
        return None
    return min(d.bit_length(), num_buckets)


def _lines(source) -> Iterable[str]:
    for raw in source:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def load_edge_list(source: BinaryIO | TextIO | Iterable[bytes] | Iterable[str]) -> Graph:
    """Parse a SNAP-style edge list: ``src dst`` per line, ``#`` comments.

    Blank lines are skipped; LF and CRLF endings are both accepted.
    """
    src: list[int] = []
    dst: list[int] = []
    for lineno, line in enumerate(_lines(source), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(lineno, f"expected 2 fields, got {len(parts)}: {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(lineno, f"non-integer vertex id in {line!r}") from None
        if a < 0 or b < 0:
            raise GraphParseError(lineno, f"negative vertex id in {line!r}")
        src.append(a)
        dst.append(b)
    return Graph.from_edges(np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))


def read_edge_list(path: str | os.PathLike) -> Graph:
    """Load an edge list from disk; ``.gz`` files are decompressed transparently."""
    path = os.fspath(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rb") as fh:
        return load_edge_list(fh)


def write_edge_list(g: Graph, sink: BinaryIO | TextIO) -> None:
    src, dst = g.edges()
    text = "".join(f"{a} {b}\n" for a, b in zip(src.tolist(), dst.tolist()))
    if isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))
