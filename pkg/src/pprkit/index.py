"""Offline fingerprint index: one Monte-Carlo PPR estimate per vertex.

On-disk layout (little-endian)::

    b"PWIX"  u16 version=1
    f64 c    u64 R    u64 N
    N x { u32 count, count x (u32 vertex, f32 score) }   # sorted by vertex
    u32 crc32                                            # over bytes after the version field

Scores are normalized probabilities.
"""

from __future__ import annotations

import os
import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from pprkit.graph import Graph
from pprkit.mc import WalkConfig, run_walks
from pprkit.sparse import SparseVector

MAGIC = b"PWIX"
VERSION = 1
_HEADER = struct.Struct("<4sH")
_PARAMS = struct.Struct("<dQQ")
_U32 = struct.Struct("<I")


class PwixError(ValueError):
    """Base class for unreadable index streams."""


class IndexFormatError(PwixError):
    pass


class IndexVersionError(PwixError):
    pass


class IndexTruncatedError(PwixError):
    pass


class IndexChecksumError(PwixError):
    pass


@dataclass(eq=False)
class PprIndex:
    num_vertices: int
    walks_per_vertex_R: int
    teleport_c: float
    indptr: np.ndarray
    ids: np.ndarray
    scores: np.ndarray
    # per-vertex sample count n behind each fingerprint; unknown after load
    visits: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        self.ids = np.ascontiguousarray(self.ids, dtype=np.int64)
        self.scores = np.ascontiguousarray(self.scores, dtype=np.float64)
        if self.indptr.size != self.num_vertices + 1:
            raise ValueError("indptr length must be num_vertices + 1")
        if self.indptr[-1] != self.ids.size or self.ids.size != self.scores.size:
            raise ValueError("fingerprint arrays are inconsistent")

    @classmethod
    def empty(cls, num_vertices: int, teleport_c: float = 0.15) -> "PprIndex":
        """Index with no fingerprints; queries against it use the settled part only."""
        return cls(num_vertices, 0, teleport_c, np.zeros(num_vertices + 1, dtype=np.int64),
                   np.empty(0, dtype=np.int64), np.empty(0))

    @property
    def is_empty(self) -> bool:
        return self.ids.size == 0

    @property
    def num_entries(self) -> int:
        return int(self.ids.size)

    def fingerprint(self, u: int) -> SparseVector:
        u = int(u)
        if not 0 <= u < self.num_vertices:
            raise IndexError(f"vertex {u} out of range [0, {self.num_vertices})")
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return SparseVector.from_arrays(self.ids[lo:hi], self.scores[lo:hi])

    def entry_counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def __len__(self) -> int:
        return self.num_vertices

    def __eq__(self, other) -> bool:
        if not isinstance(other, PprIndex):
            return NotImplemented
        return (
            self.num_vertices == other.num_vertices
            and self.walks_per_vertex_R == other.walks_per_vertex_R
            and self.teleport_c == other.teleport_c
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.scores, other.scores)
        )


def _intervals(n: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, n)) if n else 1
    bounds = np.linspace(0, n, parts + 1).round().astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:])]


def build_index(g: Graph, cfg: WalkConfig, workers: int | None = None) -> PprIndex:
    """Full-path fingerprint for every vertex.

    Vertices are split into ``workers`` equal-width ranges processed
    concurrently; the result does not depend on ``workers``.
    """
    workers = workers or os.cpu_count() or 1
    if workers < 1:
        raise ValueError("workers must be >= 1")
    n = g.num_vertices
    ranges = _intervals(n, workers)

    def work(bounds):
        lo, hi = bounds
        return run_walks(g, np.arange(lo, hi, dtype=np.int64), cfg, full_path=True)

    if len(ranges) == 1:
        parts = [work(ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, ranges))

    indptr = np.zeros(n + 1, dtype=np.int64)
    offset = 0
    for (lo, hi), (ptr, _, _, _) in zip(ranges, parts):
        indptr[lo + 1:hi + 1] = ptr[1:] + offset
        offset += ptr[-1]
    ids = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, dtype=np.int64)
    scores = np.concatenate([p[2] for p in parts]) if parts else np.empty(0)
    visits = np.concatenate([p[3] for p in parts]) if parts else np.empty(0, dtype=np.int64)
    return PprIndex(n, cfg.num_walks_R, cfg.teleport_c, indptr, ids, scores, visits)


def _encode(idx: PprIndex) -> bytes:
    n = idx.num_vertices
    counts = idx.entry_counts()
    if idx.ids.size and idx.ids.max() > 0xFFFFFFFF:
        raise ValueError("vertex ids exceed the u32 range of the format")
    words = np.empty(n + 2 * idx.ids.size, dtype="<u4")
    heads = np.arange(n, dtype=np.int64) + 2 * idx.indptr[:-1]
    words[heads] = counts
    if idx.ids.size:
        owner = np.repeat(np.arange(n, dtype=np.int64), counts)
        rank = np.arange(idx.ids.size, dtype=np.int64) - idx.indptr[:-1][owner]
        pos = heads[owner] + 1 + 2 * rank
        words[pos] = idx.ids
        words[pos + 1] = idx.scores.astype("<f4").view("<u4")
    return _PARAMS.pack(float(idx.teleport_c), int(idx.walks_per_vertex_R), n) + words.tobytes()


def save_index(idx: PprIndex, sink: BinaryIO) -> int:
    """Write ``idx`` in PWIX format; returns the number of bytes written."""
    payload = _encode(idx)
    blob = _HEADER.pack(MAGIC, VERSION) + payload + _U32.pack(zlib.crc32(payload) & 0xFFFFFFFF)
    sink.write(blob)
    return len(blob)


def load_index(source: BinaryIO) -> PprIndex:
    data = source.read()
    if len(data) < _HEADER.size:
        if MAGIC.startswith(data[:4]) and data:
            raise IndexTruncatedError("stream ends inside the header")
        raise IndexFormatError("not a PWIX stream")
    magic, version = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise IndexFormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise IndexVersionError(f"unsupported PWIX version {version}")
    pos = _HEADER.size
    if len(data) < pos + _PARAMS.size:
        raise IndexTruncatedError("stream ends inside the header")
    c, R, n = _PARAMS.unpack_from(data, pos)
    pos += _PARAMS.size

    body = memoryview(data)
    counts = np.empty(n, dtype=np.int64)
    starts = np.empty(n, dtype=np.int64)
    end = len(data)
    for v in range(n):
        if pos + 4 > end:
            raise IndexTruncatedError(f"stream ends before vector {v}")
        (k,) = _U32.unpack_from(body, pos)
        pos += 4
        if pos + 8 * k > end:
            raise IndexTruncatedError(f"stream ends inside vector {v}")
        counts[v] = k
        starts[v] = pos
        pos += 8 * k
    if pos + 4 > end:
        raise IndexTruncatedError("missing checksum")
    if pos + 4 != end:
        raise IndexFormatError(f"{end - pos - 4} trailing bytes after checksum")
    (stored,) = _U32.unpack_from(body, pos)
    if zlib.crc32(body[_HEADER.size:pos]) & 0xFFFFFFFF != stored:
        raise IndexChecksumError("CRC32 mismatch")

    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    total = int(indptr[-1])
    pairs = np.empty((total, 2), dtype="<u4")
    if total:
        owner = np.repeat(np.arange(n, dtype=np.int64), counts)
        rank = np.arange(total, dtype=np.int64) - indptr[:-1][owner]
        base = _HEADER.size + _PARAMS.size
        # everything after the parameters is a sequence of 4-byte words
        words = np.frombuffer(data, dtype="<u4", count=(pos - base) // 4, offset=base)
        word_pos = (starts[owner] - base) // 4 + 2 * rank
        pairs[:, 0] = words[word_pos]
        pairs[:, 1] = words[word_pos + 1]
    ids = pairs[:, 0].astype(np.int64)
    scores = pairs[:, 1].copy().view("<f4").astype(np.float64)
    if ids.size and ids.max() >= n:
        raise IndexFormatError("fingerprint references a vertex outside [0, N)")
    return PprIndex(int(n), int(R), float(c), indptr, ids, scores)
