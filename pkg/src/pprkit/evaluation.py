"""Exact ground truth, the RAG top-k accuracy metric, and the bucketed evaluation protocol."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from pprkit.graph import Graph, degree_bucket
from pprkit.index import PprIndex
from pprkit.mc import WalkConfig, mcep_estimate, mcfp_estimate
from pprkit.sparse import SparseVector, top_k
from pprkit.verd import QueryBatch, combine, verd_batch

GROUND_TRUTH_TOL = 1e-12
GROUND_TRUTH_MAX_ITERS = 10000


class ConvergenceError(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(f"power iteration did not converge after {iterations} iterations "
                         f"(last L1 residual {residual:.3e})")
        self.residual = residual
        self.iterations = iterations


def _check(g: Graph, u: int) -> int:
    u = int(u)
    if not 0 <= u < g.num_vertices:
        raise IndexError(f"vertex {u} out of range [0, {g.num_vertices})")
    return u


def power_iteration_dense(
    g: Graph, u: int, c: float = 0.15, tol: float = GROUND_TRUTH_TOL, max_iters: int = GROUND_TRUTH_MAX_ITERS
) -> tuple[np.ndarray, int]:
    """Dense PPR vector of ``u`` and the number of iterations used.

    Starts at ``e_u`` and applies ``p <- (1-c) p A + c e_u`` until the L1
    change is at most ``tol``.  Dangling rows of ``A`` are ``e_u``.
    """
    u = _check(g, u)
    if not 0.0 < c < 1.0:
        raise ValueError("c must lie in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    n = g.num_vertices
    deg = g.out_degrees
    dangling = g.dangling
    inv_deg = np.zeros(n)
    np.divide(1.0, deg, out=inv_deg, where=deg > 0)
    p = np.zeros(n)
    p[u] = 1.0
    residual = np.inf
    for it in range(1, max_iters + 1):
        spread = np.repeat(p * inv_deg, deg)
        nxt = np.bincount(g.indices, weights=spread, minlength=n)
        nxt[u] += p[dangling].sum()
        nxt *= 1.0 - c
        nxt[u] += c
        residual = float(np.abs(nxt - p).sum())
        p = nxt
        if residual <= tol:
            return p, it
    raise ConvergenceError(residual, max_iters)


def power_iteration(
    g: Graph, u: int, c: float = 0.15, tol: float = GROUND_TRUTH_TOL, max_iters: int = GROUND_TRUTH_MAX_ITERS
) -> SparseVector:
    p, _ = power_iteration_dense(g, u, c, tol, max_iters)
    nz = np.flatnonzero(p)
    return SparseVector.from_arrays(nz, p[nz])


def rag(exact: Mapping[int, float], approx: Mapping[int, float], k: int) -> float:
    """Exact mass captured by the approximate top-k over the exact top-k mass."""
    best = sum(score for _, score in top_k(exact, k))
    if best == 0:
        return 1.0
    got = sum(exact.get(v, 0.0) for v, _ in top_k(approx, k))
    return min(1.0, got / best)


def sample_queries(g: Graph, per_bucket: int, num_buckets: int, seed: int) -> list[int]:
    """Up to ``per_bucket`` random vertices from each out-degree bucket, bucket by bucket."""
    if per_bucket < 1 or num_buckets < 1:
        raise ValueError("per_bucket and num_buckets must be >= 1")
    deg = g.out_degrees
    buckets = np.zeros(g.num_vertices, dtype=np.int64)
    pos = deg > 0
    # bit_length of the degree, capped at the last bucket
    buckets[pos] = np.minimum(np.floor(np.log2(deg[pos])).astype(np.int64) + 1, num_buckets)
    rng = np.random.default_rng(seed)
    picked: list[int] = []
    for b in range(1, num_buckets + 1):
        members = np.flatnonzero(buckets == b)
        if members.size <= per_bucket:
            chosen = members
        else:
            chosen = np.sort(rng.choice(members, size=per_bucket, replace=False))
        picked.extend(int(v) for v in chosen)
    return picked


@dataclass(frozen=True)
class Method:
    """Which approximation to score: ``mcfp``, ``mcep``, ``verd`` or ``lookup``."""

    kind: str
    R: int = 0
    T: int = 0
    epsilon: float | None = None
    seed: int = 42

    def __post_init__(self):
        if self.kind not in ("mcfp", "mcep", "verd", "lookup"):
            raise ValueError(f"unknown method {self.kind!r}")
        if self.kind in ("mcfp", "mcep") and self.R < 1:
            raise ValueError(f"{self.kind} needs R >= 1")

    def label(self) -> str:
        if self.kind == "verd":
            return f"verd(T={self.T})"
        if self.kind == "lookup":
            return "lookup"
        return f"{self.kind}(R={self.R})"


@dataclass
class EvalReport:
    ks: list[int]
    rag: dict[tuple[int, int], float] = field(default_factory=dict)
    buckets: dict[int, int | None] = field(default_factory=dict)
    failed: dict[int, str] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def sources(self) -> list[int]:
        return list(self.buckets)

    def mean(self, k: int) -> float:
        vals = [r for (u, kk), r in self.rag.items() if kk == k]
        return float(np.mean(vals)) if vals else float("nan")

    def bucket_means(self, k: int) -> dict[int | None, float]:
        groups: dict[int | None, list[float]] = {}
        for (u, kk), r in self.rag.items():
            if kk == k:
                groups.setdefault(self.buckets.get(u), []).append(r)
        return {b: float(np.mean(v)) for b, v in sorted(groups.items(), key=lambda kv: (kv[0] is None, kv[0] or 0))}

    def to_tsv(self) -> str:
        out = io.StringIO()
        out.write("source\tbucket\tk\trag\n")
        for (u, k), r in self.rag.items():
            b = self.buckets.get(u)
            out.write(f"{u}\t{'NA' if b is None else b}\t{k}\t{r:.10g}\n")
        return out.getvalue()

    def summary(self) -> str:
        lines = [f"# {key}={value}" for key, value in self.metadata.items()]
        lines.append(f"# sources={len(self.buckets)} failed={len(self.failed)}")
        for u, msg in self.failed.items():
            lines.append(f"# failed source {u}: {msg}")
        for k in self.ks:
            lines.append(f"mean_rag\tk={k}\t{self.mean(k):.10g}")
            for b, m in self.bucket_means(k).items():
                lines.append(f"bucket_rag\tk={k}\tbucket={'NA' if b is None else b}\t{m:.10g}")
        return "\n".join(lines) + "\n"


def ground_truth(g: Graph, sources: Sequence[int], c: float = 0.15) -> dict[int, SparseVector]:
    return {int(u): power_iteration(g, u, c) for u in sources}


def _approximations(g: Graph, idx: PprIndex | None, method: Method, sources: Sequence[int], c: float,
                    workers: int | None, failed: dict[int, str]) -> dict[int, SparseVector]:
    out: dict[int, SparseVector] = {}
    if method.kind == "verd":
        valid = []
        for u in sources:
            if 0 <= u < g.num_vertices:
                valid.append(u)
            else:
                failed[u] = f"vertex {u} out of range"
        batch = QueryBatch(tuple(valid), method.T, method.epsilon)
        states = verd_batch(g, batch, c=c, workers=workers)
        for u, st in states.items():
            out[u] = combine(idx, st, batch.epsilon)
        return out
    for u in sources:
        try:
            if method.kind == "lookup":
                if idx is None:
                    raise ValueError("lookup needs an index")
                out[u] = idx.fingerprint(u)
            else:
                cfg = WalkConfig(c, method.R, method.seed)
                est = mcfp_estimate if method.kind == "mcfp" else mcep_estimate
                out[u] = est(g, u, cfg)
        except Exception as exc:  # a pathological source must not abort the run
            failed[u] = f"{type(exc).__name__}: {exc}"
    return out


def evaluate(
    g: Graph,
    idx: PprIndex | None,
    method: Method,
    ks: Sequence[int],
    sources: Sequence[int],
    *,
    c: float = 0.15,
    num_buckets: int = 10,
    exact: Mapping[int, SparseVector] | None = None,
    workers: int | None = 1,
) -> EvalReport:
    """RAG at each ``k`` for every source; ``exact`` may supply cached ground truth."""
    if not sources:
        raise ValueError("no sources to evaluate")
    sources = [int(u) for u in sources]
    report = EvalReport(ks=list(ks))
    report.metadata = {
        "method": method.label(),
        "c": c,
        "R": idx.walks_per_vertex_R if idx is not None and method.kind in ("verd", "lookup") else method.R,
        "T": method.T,
        "seed": method.seed,
        "ground_truth_tol": GROUND_TRUTH_TOL,
        "ground_truth_max_iters": GROUND_TRUTH_MAX_ITERS,
    }
    approx = _approximations(g, idx, method, sources, c, workers, report.failed)
    for u in sources:
        report.buckets[u] = degree_bucket(g, u, num_buckets) if 0 <= u < g.num_vertices else None
        if u in report.failed:
            continue
        try:
            truth = exact[u] if exact is not None and u in exact else power_iteration(g, u, c)
        except Exception as exc:
            report.failed[u] = f"{type(exc).__name__}: {exc}"
            continue
        for k in report.ks:
            report.rag[(u, k)] = rag(truth, approx[u], k)
    return report
