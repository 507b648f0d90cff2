"""Monte-Carlo estimators of a single personalized PageRank vector.

Walk dynamics shared by both estimators: a walk starts at the source ``u``;
before every move it stops with probability ``c``, otherwise it moves to a
uniformly chosen entry of the current vertex's neighbor list, or back to
``u`` when the current vertex is dangling.

Randomness is counter-based: walk ``i`` of source ``u`` draws its k-th number
as ``splitmix64(key(seed, u, i) + k * gamma)``.  No generator state is shared
between walks, so results do not depend on how sources are split across
workers or in which order walks run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from pprkit.graph import Graph
from pprkit.sparse import SparseVector

_MASK64 = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@dataclass(frozen=True)
class WalkConfig:
    teleport_c: float = 0.15
    num_walks_R: int = 1000
    rng_seed: int = 42

    def __post_init__(self):
        if not 0.0 < self.teleport_c < 1.0:
            raise ValueError(f"teleport_c must lie in (0, 1), got {self.teleport_c}")
        if int(self.num_walks_R) != self.num_walks_R or self.num_walks_R < 1:
            raise ValueError(f"num_walks_R must be a positive integer, got {self.num_walks_R}")
        object.__setattr__(self, "num_walks_R", int(self.num_walks_R))
        object.__setattr__(self, "rng_seed", int(self.rng_seed) & _MASK64)


@numba.njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(inline="always")
def _uniform(key, k):
    # k-th draw of the stream identified by key, in [0, 1)
    x = _mix64(key + (np.uint64(k) + np.uint64(1)) * _GAMMA)
    return np.float64(x >> _S11) * _INV53


@numba.njit(inline="always")
def _stream_key(seed, u, i):
    h = _mix64(seed)
    h = _mix64(h + np.uint64(u) * _GAMMA + np.uint64(1))
    return _mix64(h ^ (np.uint64(i) * _M1 + np.uint64(2)))


@numba.njit(nogil=True, cache=True)
def _walk_sources(indptr, indices, sources, num_walks, c, seed, full_path, count_start):
    """Run ``num_walks`` walks from each source.

    Returns CSR pieces ``(ptr, ids, scores, visits)``: the normalized estimate
    for ``sources[j]`` lives in ``ids/scores[ptr[j]:ptr[j+1]]`` (ids sorted)
    and ``visits[j]`` is the sample count it was normalized by.
    """
    n = indptr.size - 1
    counts = np.zeros(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    ns = sources.size
    ptr = np.zeros(ns + 1, dtype=np.int64)
    visits = np.zeros(ns, dtype=np.int64)
    cap = max(16, ns * 8)
    ids = np.empty(cap, dtype=np.int64)
    scores = np.empty(cap, dtype=np.float64)
    for j in range(ns):
        u = sources[j]
        m = 0
        total = 0
        for i in range(num_walks):
            key = _stream_key(seed, u, i)
            w = u
            if full_path and count_start:
                if counts[w] == 0:
                    touched[m] = w
                    m += 1
                counts[w] += 1
                total += 1
            k = 0
            while True:
                x = _uniform(key, k)
                k += 1
                if x < c:
                    break
                lo = indptr[w]
                deg = indptr[w + 1] - lo
                if deg == 0:
                    w = u
                else:
                    r = int(_uniform(key, k) * deg)
                    k += 1
                    if r >= deg:
                        r = deg - 1
                    w = indices[lo + r]
                if full_path:
                    if counts[w] == 0:
                        touched[m] = w
                        m += 1
                    counts[w] += 1
                    total += 1
            if not full_path:
                if counts[w] == 0:
                    touched[m] = w
                    m += 1
                counts[w] += 1
                total += 1
        hit = np.sort(touched[:m])
        start = ptr[j]
        if start + m > cap:
            while start + m > cap:
                cap *= 2
            grown_ids = np.empty(cap, dtype=np.int64)
            grown_scores = np.empty(cap, dtype=np.float64)
            grown_ids[:start] = ids[:start]
            grown_scores[:start] = scores[:start]
            ids = grown_ids
            scores = grown_scores
        for t in range(m):
            v = hit[t]
            ids[start + t] = v
            scores[start + t] = counts[v] / total if total > 0 else 0.0
            counts[v] = 0
        ptr[j + 1] = start + m
        visits[j] = total
    return ptr, ids[:ptr[ns]], scores[:ptr[ns]], visits


def run_walks(g: Graph, sources, cfg: WalkConfig, full_path: bool = True, count_start: bool = True):
    """Vectorized entry point used by the index builder; see ``_walk_sources``."""
    sources = np.ascontiguousarray(sources, dtype=np.int64)
    if sources.size and (sources.min() < 0 or sources.max() >= g.num_vertices):
        raise IndexError("source vertex out of range")
    return _walk_sources(
        g.indptr,
        g.indices,
        sources,
        cfg.num_walks_R,
        float(cfg.teleport_c),
        np.uint64(cfg.rng_seed),
        full_path,
        count_start,
    )


def _single(g: Graph, u: int, cfg: WalkConfig, full_path: bool, count_start: bool = True) -> SparseVector:
    u = int(u)
    if not 0 <= u < g.num_vertices:
        raise IndexError(f"vertex {u} out of range [0, {g.num_vertices})")
    ptr, ids, scores, _ = run_walks(g, np.array([u]), cfg, full_path, count_start)
    return SparseVector.from_arrays(ids, scores)


def mcfp_estimate(g: Graph, u: int, cfg: WalkConfig, *, count_start: bool = True) -> SparseVector:
    """Full-path estimate: visit frequency over every vertex of every walk.

    The start vertex of each walk counts as one visit.  ``count_start=False``
    drops those visits; it exists only for sensitivity checks.
    """
    return _single(g, u, cfg, True, count_start)


def mcep_estimate(g: Graph, u: int, cfg: WalkConfig) -> SparseVector:
    """End-point estimate: fraction of walks terminating at each vertex."""
    return _single(g, u, cfg, False)


def full_path_tail_bound(gamma: float, R: int, c: float) -> float:
    """Tail bound on over- (or under-) estimating one full-path entry by ``gamma``.

    ``(1/sqrt(c)) * (1 + gamma*c/10) * exp(-gamma**2 * R / 20)``
    """
    if gamma < 0 or not math.isfinite(gamma):
        raise ValueError(f"gamma must be a finite value >= 0, got {gamma}")
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must lie in (0, 1), got {c}")
    return (1.0 / math.sqrt(c)) * (1.0 + gamma * c / 10.0) * math.exp(-(gamma ** 2) * R / 20.0)
