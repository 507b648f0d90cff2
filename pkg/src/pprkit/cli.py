"""Command-line front end: ``pprkit {build-index,query,eval,oracle}``."""

from __future__ import annotations

import argparse
import sys
import time
from typing import Sequence, TextIO

from pprkit.evaluation import (
    GROUND_TRUTH_MAX_ITERS,
    GROUND_TRUTH_TOL,
    ConvergenceError,
    Method,
    evaluate,
    power_iteration,
    sample_queries,
)
from pprkit.graph import Graph, GraphParseError, read_edge_list
from pprkit.index import PprIndex, PwixError, build_index, load_index, save_index
from pprkit.mc import WalkConfig
from pprkit.sparse import top_k
from pprkit.verd import query

DEFAULT_C = 0.15
DEFAULT_SEED = 42


class UsageError(Exception):
    pass


def _topk_list(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid k list {text!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError("k values must be >= 1")
    return ks


def _teleport(text: str) -> float:
    c = float(text)
    if not 0.0 < c < 1.0:
        raise argparse.ArgumentTypeError("teleport probability must lie in (0, 1)")
    return c


def read_batch_file(path: str) -> list[int]:
    """One source id per line; ``#`` starts a comment line."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise UsageError(f"{path}:{lineno}: not a vertex id: {line!r}") from None
    return out


def format_ranking(v, k: int) -> str:
    return "".join(f"{rank}\t{vertex}\t{score:.10g}\n" for rank, (vertex, score) in enumerate(top_k(v, k), start=1))


def _open_out(path: str | None) -> TextIO:
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _load_graph(path: str) -> Graph:
    return read_edge_list(path)


def _load_index(path: str) -> PprIndex:
    with open(path, "rb") as fh:
        return load_index(fh)


def cmd_build_index(args) -> int:
    if args.walks is None or args.walks < 1:
        raise UsageError("build-index needs --walks R with R >= 1 (R=0 is a query-time mode, see query --no-index)")
    if not args.out and not args.index:
        raise UsageError("build-index needs --out FILE")
    g = _load_graph(args.graph)
    cfg = WalkConfig(args.teleport, args.walks, args.seed)
    start = time.perf_counter()
    idx = build_index(g, cfg, workers=args.workers)
    with open(args.out or args.index, "wb") as fh:
        nbytes = save_index(idx, fh)
    elapsed = time.perf_counter() - start
    print(f"N\t{g.num_vertices}")
    print(f"M\t{g.num_edges}")
    print(f"R\t{cfg.num_walks_R}")
    print(f"entries\t{idx.num_entries}")
    print(f"bytes\t{nbytes}")
    print(f"elapsed_s\t{elapsed:.3f}", file=sys.stderr)
    return 0


def cmd_query(args) -> int:
    if args.source is None and not args.batch:
        raise UsageError("query needs a source id or --batch FILE")
    if args.no_index and args.index:
        raise UsageError("--index and --no-index are mutually exclusive")
    sources = [args.source] if args.source is not None else read_batch_file(args.batch)
    g = _load_graph(args.graph)
    for u in sources:
        if not 0 <= u < g.num_vertices:
            print(f"error: unknown source vertex {u} (graph has {g.num_vertices} vertices)", file=sys.stderr)
            return 1
    idx = None if args.no_index or not args.index else _load_index(args.index)
    if idx is not None and idx.num_vertices != g.num_vertices:
        raise UsageError(f"index covers {idx.num_vertices} vertices but the graph has {g.num_vertices}")
    c = idx.teleport_c if idx is not None else args.teleport
    results = query(g, idx, sources, args.iters, args.epsilon, c=c, workers=args.workers)
    k = args.topk[0]
    out = _open_out(args.out)
    try:
        for u in sources:
            out.write(f"# source {u}\n")
            out.write(format_ranking(results[u], k))
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_eval(args) -> int:
    g = _load_graph(args.graph)
    if args.batch:
        sources = read_batch_file(args.batch)
    else:
        sources = sample_queries(g, args.per_bucket, args.buckets, args.seed)
    if not sources:
        raise UsageError("no sources to evaluate")
    idx = None
    if args.method in ("verd", "lookup"):
        if args.index:
            idx = _load_index(args.index)
        elif args.walks:
            idx = build_index(g, WalkConfig(args.teleport, args.walks, args.seed), workers=args.workers)
        elif args.method == "lookup":
            raise UsageError("lookup needs --index or --walks R >= 1")
    method = Method(args.method, R=args.walks or 0, T=args.iters, epsilon=args.epsilon, seed=args.seed)
    report = evaluate(g, idx, method, args.topk, sources, c=args.teleport, num_buckets=args.buckets,
                      workers=args.workers)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_tsv())
    sys.stdout.write(report.summary())
    return 0


def cmd_oracle(args) -> int:
    g = _load_graph(args.graph)
    if not 0 <= args.source < g.num_vertices:
        print(f"error: unknown source vertex {args.source}", file=sys.stderr)
        return 1
    p = power_iteration(g, args.source, args.teleport, args.tol, args.max_iters)
    out = _open_out(args.out)
    try:
        out.write(format_ranking(p, args.topk[0] if args.topk else max(1, len(p))))
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pprkit", description="Personalized PageRank index and queries")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, topk_default="10"):
        p.add_argument("--graph", required=True, help="edge list (SNAP format, optionally .gz)")
        p.add_argument("--teleport", type=_teleport, default=DEFAULT_C, metavar="c")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--workers", type=int, default=None, help="default: available CPUs")
        p.add_argument("--out", metavar="FILE")
        if topk_default is not None:
            p.add_argument("--topk", type=_topk_list, default=_topk_list(topk_default), metavar="k[,k...]")

    p = sub.add_parser("build-index", help="simulate walks and write a PWIX index")
    common(p, topk_default=None)
    p.add_argument("--walks", type=int, metavar="R")
    p.add_argument("--index", metavar="FILE", help="alias for --out")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("query", help="top-k PPR for one source or a batch")
    common(p)
    p.add_argument("source", nargs="?", type=int)
    p.add_argument("--index", metavar="FILE")
    p.add_argument("--no-index", action="store_true", help="settled part only (R=0 mode)")
    p.add_argument("--iters", type=int, default=2, metavar="T")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--batch", metavar="FILE")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="RAG accuracy against power-iteration ground truth")
    common(p, topk_default="200")
    p.add_argument("--method", choices=["mcfp", "mcep", "verd", "lookup"], default="mcfp")
    p.add_argument("--walks", type=int, default=0, metavar="R")
    p.add_argument("--iters", type=int, default=0, metavar="T")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--index", metavar="FILE")
    p.add_argument("--batch", metavar="FILE", help="explicit source list instead of bucket sampling")
    p.add_argument("--buckets", type=int, default=10, metavar="B")
    p.add_argument("--per-bucket", type=int, default=10)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="exact PPR by power iteration")
    common(p, topk_default=None)
    p.add_argument("source", type=int)
    p.add_argument("--topk", type=_topk_list, default=None, metavar="k")
    p.add_argument("--tol", type=float, default=GROUND_TRUTH_TOL)
    p.add_argument("--max-iters", type=int, default=GROUND_TRUTH_MAX_ITERS)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (OSError, GraphParseError, PwixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
