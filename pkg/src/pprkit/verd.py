"""Online queries by vertex-centric decomposition over the fingerprint index.

A PPR vector is unfolded ``T`` levels as ``p_u = s + sum_v f(v) * p_v``: the
settled part ``s`` holds teleport mass already assigned, the frontier ``f``
holds mass still to be expanded.  The final answer replaces each ``p_v`` by
its fingerprint.

Dangling vertices: frontier mass sitting on a vertex without out-edges is
forwarded to the query source that owns it, mirroring the artificial edge
back to the source used by the exact PPR definition.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from pprkit.graph import Graph
from pprkit.index import PprIndex
from pprkit.sparse import SparseVector

LARGE_T_EPSILON = 1e-7


def default_epsilon(T: int) -> float:
    return 0.0 if T <= 3 else LARGE_T_EPSILON


@dataclass(frozen=True)
class DecompState:
    s: SparseVector
    f: SparseVector
    iteration: int

    def mass(self) -> float:
        return self.s.total() + self.f.total()


@dataclass(frozen=True)
class QueryBatch:
    sources: tuple[int, ...]
    iterations_T: int
    truncation_epsilon: float | None = None

    def __post_init__(self):
        seen = dict.fromkeys(int(u) for u in self.sources)
        object.__setattr__(self, "sources", tuple(seen))
        if self.iterations_T < 0:
            raise ValueError("iterations_T must be >= 0")
        if self.truncation_epsilon is not None and self.truncation_epsilon < 0:
            raise ValueError("truncation_epsilon must be >= 0")

    @property
    def epsilon(self) -> float:
        if self.truncation_epsilon is None:
            return default_epsilon(self.iterations_T)
        return self.truncation_epsilon


def _check_vertex(g: Graph, u: int) -> int:
    u = int(u)
    if not 0 <= u < g.num_vertices:
        raise IndexError(f"vertex {u} out of range [0, {g.num_vertices})")
    return u


def decomp_recursive(g: Graph, idx: PprIndex, u: int, T: int) -> SparseVector:
    """Recursive decomposition: fingerprint at depth 0, neighbor average above.

    Exponential in ``T``; kept as the reference the iterative form is checked
    against.
    """
    source = _check_vertex(g, u)
    if T < 0:
        raise ValueError("T must be >= 0")
    c = idx.teleport_c

    def rec(w: int, depth: int) -> SparseVector:
        if depth == 0:
            return idx.fingerprint(w) if not idx.is_empty else SparseVector()
        nbrs = g.out_neighbors(w).tolist() or [source]
        share = (1.0 - c) / len(nbrs)
        out = SparseVector({w: c})
        for v in nbrs:
            for k, val in rec(v, depth - 1).items():
                out.add(k, share * val)
        return out

    return rec(source, T)


def verd_single(g: Graph, u: int, T: int, epsilon: float | None = None, c: float = 0.15) -> DecompState:
    """Iterate the settled/frontier recurrences ``T`` times from ``s=0, f=e_u``.

    After every iteration entries of ``s`` and ``f`` strictly below
    ``epsilon`` are dropped.
    """
    u = _check_vertex(g, u)
    if T < 0:
        raise ValueError("T must be >= 0")
    if not 0.0 < c < 1.0:
        raise ValueError("c must lie in (0, 1)")
    eps = default_epsilon(T) if epsilon is None else epsilon
    indptr = g.indptr.tolist()
    indices = g.indices.tolist()

    s: dict[int, float] = {}
    f: dict[int, float] = {u: 1.0}
    for _ in range(T):
        nxt: dict[int, float] = {}
        for w, t in f.items():
            s[w] = s.get(w, 0.0) + c * t
            lo, hi = indptr[w], indptr[w + 1]
            if lo == hi:
                nxt[u] = nxt.get(u, 0.0) + (1.0 - c) * t
                continue
            share = (1.0 - c) * t / (hi - lo)
            for v in indices[lo:hi]:
                nxt[v] = nxt.get(v, 0.0) + share
        f = nxt
        if eps > 0:
            s = {k: v for k, v in s.items() if v >= eps}
            f = {k: v for k, v in f.items() if v >= eps}
    return DecompState(SparseVector(s), SparseVector(f), T)


def _aggregate(vertex: np.ndarray, key: np.ndarray, mass: np.ndarray, num_keys: int):
    """Sum ``mass`` over equal ``(vertex, key)`` pairs; output sorted by vertex then key."""
    if vertex.size == 0:
        return vertex, key, mass
    combined = vertex * num_keys + key
    uniq, inverse = np.unique(combined, return_inverse=True)
    summed = np.bincount(inverse, weights=mass, minlength=uniq.size)
    return uniq // num_keys, uniq % num_keys, summed


def _scatter(g: Graph, sources: np.ndarray, fv, fk, fm, c: float):
    """Messages sent along out-edges by the frontier entries ``(fv, fk, fm)``.

    Messages come out in frontier order; a dangling sender emits a single
    message addressed to the source owning the mass.
    """
    deg = g.indptr[fv + 1] - g.indptr[fv]
    fanout = np.maximum(deg, 1)
    reps = np.repeat(np.arange(fv.size), fanout)
    # position of each message within its sender's neighbor list
    offs = np.arange(reps.size) - np.repeat(np.cumsum(fanout) - fanout, fanout)
    dead = (deg == 0)[reps]
    edge = np.where(dead, 0, g.indptr[fv][reps] + offs)
    targets = g.indices[edge] if g.num_edges else np.zeros(reps.size, dtype=np.int64)
    keys = fk[reps]
    targets = np.where(dead, sources[keys], targets)
    values = ((1.0 - c) * fm / fanout)[reps]
    return targets, keys, values


def verd_batch(g: Graph, batch: QueryBatch, c: float = 0.15, workers: int | None = 1) -> dict[int, DecompState]:
    """Decompose every source of ``batch`` in one shared pass per iteration.

    Each vertex holds a map source -> frontier mass.  An iteration applies the
    teleport share to the settled maps, sends the rest along out-edges, and
    aggregates received messages by target vertex and source (the barrier).
    Vertex ranges may be processed by ``workers`` threads; message order, and
    hence every floating-point sum, does not depend on the worker count.
    """
    sources = np.array(batch.sources, dtype=np.int64)
    for u in batch.sources:
        _check_vertex(g, u)
    if not 0.0 < c < 1.0:
        raise ValueError("c must lie in (0, 1)")
    if sources.size == 0:
        return {}
    workers = workers or os.cpu_count() or 1
    K = sources.size
    eps = batch.epsilon

    fv, fk, fm = sources.copy(), np.arange(K, dtype=np.int64), np.ones(K)
    fv, fk, fm = _aggregate(fv, fk, fm, K)
    sv = np.empty(0, dtype=np.int64)
    sk = np.empty(0, dtype=np.int64)
    sm = np.empty(0)

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for _ in range(batch.iterations_T):
            # apply: settle the teleport share at each frontier vertex
            sv, sk, sm = _aggregate(np.concatenate([sv, fv]), np.concatenate([sk, fk]),
                                    np.concatenate([sm, c * fm]), K)
            # scatter, partitioned by contiguous vertex ranges of the sorted frontier
            if pool is None or fv.size < 2:
                msgs = [_scatter(g, sources, fv, fk, fm, c)]
            else:
                cuts = np.searchsorted(fv, np.linspace(0, g.num_vertices, workers + 1)[1:-1])
                parts = zip(np.split(fv, cuts), np.split(fk, cuts), np.split(fm, cuts))
                msgs = list(pool.map(lambda p: _scatter(g, sources, *p, c), parts))
            # barrier: aggregate messages by (target vertex, source)
            fv, fk, fm = _aggregate(np.concatenate([m[0] for m in msgs]),
                                    np.concatenate([m[1] for m in msgs]),
                                    np.concatenate([m[2] for m in msgs]), K)
            if eps > 0:
                keep = sm >= eps
                sv, sk, sm = sv[keep], sk[keep], sm[keep]
                keep = fm >= eps
                fv, fk, fm = fv[keep], fk[keep], fm[keep]
    finally:
        if pool is not None:
            pool.shutdown()

    out: dict[int, DecompState] = {}
    s_by_key = _split_by_key(sv, sk, sm, K)
    f_by_key = _split_by_key(fv, fk, fm, K)
    for j, u in enumerate(batch.sources):
        out[u] = DecompState(s_by_key[j], f_by_key[j], batch.iterations_T)
    return out


def _split_by_key(vertex, key, mass, num_keys) -> list[SparseVector]:
    order = np.lexsort((vertex, key))
    vertex, key, mass = vertex[order], key[order], mass[order]
    bounds = np.searchsorted(key, np.arange(num_keys + 1))
    return [SparseVector.from_arrays(vertex[a:b], mass[a:b]) for a, b in zip(bounds[:-1], bounds[1:])]


def combine(idx: PprIndex | None, state: DecompState, epsilon: float = 0.0) -> SparseVector:
    """``s + sum_v f(v) * fingerprint(v)``; with no index (or an empty one) just ``s``.

    Frontier entries below ``epsilon`` are not looked up.
    """
    s_ids, s_val = state.s.to_arrays()
    if idx is None or idx.is_empty or not state.f:
        return SparseVector.from_arrays(s_ids, s_val)
    f_ids, f_val = state.f.to_arrays()
    if epsilon > 0:
        keep = f_val >= epsilon
        f_ids, f_val = f_ids[keep], f_val[keep]
    if f_ids.size and f_ids.max() >= idx.num_vertices:
        raise IndexError("frontier references a vertex outside the index")
    lo = idx.indptr[f_ids]
    cnt = idx.indptr[f_ids + 1] - lo
    reps = np.repeat(np.arange(f_ids.size), cnt)
    pos = lo[reps] + (np.arange(reps.size) - np.repeat(np.cumsum(cnt) - cnt, cnt))
    ids = np.concatenate([s_ids, idx.ids[pos]])
    vals = np.concatenate([s_val, idx.scores[pos] * f_val[reps]])
    uniq, inverse = np.unique(ids, return_inverse=True)
    return SparseVector.from_arrays(uniq, np.bincount(inverse, weights=vals, minlength=uniq.size))


def query(
    g: Graph,
    idx: PprIndex | None,
    sources: Iterable[int],
    T: int,
    epsilon: float | None = None,
    c: float | None = None,
    workers: int | None = 1,
) -> dict[int, SparseVector]:
    """Batch query: shared decomposition followed by combination with the index."""
    if c is None:
        c = idx.teleport_c if idx is not None and not idx.is_empty else 0.15
    batch = QueryBatch(tuple(sources), T, epsilon)
    states = verd_batch(g, batch, c=c, workers=workers)
    return {u: combine(idx, st, batch.epsilon) for u, st in states.items()}


