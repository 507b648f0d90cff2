import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphs import FIG2_EDGES
from pprkit.graph import Graph, GraphParseError, degree_bucket, load_edge_list, write_edge_list


def load(text: str) -> Graph:
    return load_edge_list(io.BytesIO(text.encode()))


def test_fig2_edge_list():
    g = load(FIG2_EDGES)
    assert (g.num_vertices, g.num_edges) == (8, 10)
    assert g.out_neighbors(0).tolist() == [1, 2]
    assert g.dangling.tolist() == [3, 4, 5, 6, 7]


def test_empty_stream():
    g = load("")
    assert (g.num_vertices, g.num_edges) == (0, 0)


def test_single_edge():
    g = load("0 1")
    assert (g.num_vertices, g.num_edges) == (2, 1)
    assert g.dangling.tolist() == [1]


def test_comments_crlf_and_gaps():
    g = load("# FromNodeId\tToNodeId\r\n0\t5\r\n\r\n5 0\r\n")
    assert g.num_vertices == 6
    assert g.dangling.tolist() == [1, 2, 3, 4]


def test_parallel_edges_and_self_loops_kept():
    g = load("1 1\n0 2\n0 2\n0 1\n")
    assert g.out_neighbors(0).tolist() == [1, 2, 2]
    assert g.out_neighbors(1).tolist() == [1]
    assert g.num_edges == 4


@pytest.mark.parametrize("text, lineno", [
    ("0 1\n0 x\n", 2),
    ("# c\n0 1\n1 -3\n", 3),
    ("0 1 2\n", 1),
    ("7\n", 1),
])
def test_parse_errors_carry_line(text, lineno):
    with pytest.raises(GraphParseError) as err:
        load(text)
    assert err.value.lineno == lineno


def test_text_stream_accepted():
    g = load_edge_list(io.StringIO("0 1\n1 2\n"))
    assert g.num_edges == 2


def test_out_neighbors_range(fig2):
    assert fig2.out_neighbors(4).size == 0
    with pytest.raises(IndexError):
        fig2.out_neighbors(8)
    with pytest.raises(IndexError):
        fig2.out_neighbors(-1)


def test_neighbor_views_are_read_only(fig2):
    with pytest.raises(ValueError):
        fig2.out_neighbors(0)[0] = 5


@pytest.mark.parametrize("degree, buckets, expected", [
    (1, 10, 1), (2, 10, 2), (3, 10, 2), (4, 10, 3), (255, 10, 8), (256, 10, 9),
    (511, 10, 9), (512, 10, 10), (5000, 10, 10), (7, 1, 1), (0, 10, None),
])
def test_degree_bucket(degree, buckets, expected):
    g = Graph.from_edges([0] * degree, list(range(1, degree + 1)), num_vertices=max(degree + 1, 1))
    assert degree_bucket(g, 0, buckets) == expected


def test_degree_bucket_rejects_bad_b(fig2):
    with pytest.raises(ValueError):
        degree_bucket(fig2, 0, 0)


edge_lists = st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), max_size=80)


@settings(max_examples=60, deadline=None)
@given(edge_lists)
def test_roundtrip_is_multiset_equal(edges):
    text = "".join(f"{a} {b}\n" for a, b in edges)
    g = load(text)
    buf = io.BytesIO()
    write_edge_list(g, buf)
    src, dst = load(buf.getvalue().decode()).edges()
    assert sorted(zip(src.tolist(), dst.tolist())) == sorted(edges)


@settings(max_examples=60, deadline=None)
@given(edge_lists)
def test_csr_invariants(edges):
    g = load("".join(f"{a} {b}\n" for a, b in edges))
    assert g.out_degrees.sum() == g.num_edges == len(edges)
    for u in range(g.num_vertices):
        nbrs = g.out_neighbors(u)
        assert nbrs.size == g.out_degree(u)
        assert np.all(np.diff(nbrs) >= 0)
        assert (u in set(g.dangling.tolist())) == (nbrs.size == 0)
    if g.num_edges:
        assert g.indices.max() < g.num_vertices


def test_degree_bucket_monotone():
    degrees = list(range(1, 1200))
    g = Graph.from_edges(
        np.repeat(np.arange(len(degrees)), degrees), np.zeros(sum(degrees), dtype=int), num_vertices=len(degrees)
    )
    buckets = [degree_bucket(g, u, 10) for u in range(len(degrees))]
    assert buckets == sorted(buckets)


def test_reachable_from(fig2):
    assert fig2.reachable_from(1).tolist() == [False, True, False, True, True, True, True, False]
