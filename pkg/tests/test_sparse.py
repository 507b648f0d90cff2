import numpy as np
import pytest

from pprkit.sparse import SparseVector, top_k


def test_zeros_are_dropped():
    v = SparseVector({1: 0.0, 2: 0.5})
    assert dict(v) == {2: 0.5}


def test_negative_rejected():
    with pytest.raises(ValueError):
        SparseVector({1: -0.1})


def test_arrays_roundtrip_sorted():
    v = SparseVector({9: 0.25, 2: 0.5, 4: 0.25})
    ids, scores = v.to_arrays()
    assert ids.tolist() == [2, 4, 9]
    assert SparseVector.from_arrays(ids, scores) == v
    assert v.to_dense(10)[[2, 4, 9]].tolist() == [0.5, 0.25, 0.25]


def test_pruned_keeps_threshold_entries():
    v = SparseVector({0: 1e-3, 1: 1e-8, 2: 1e-7})
    assert set(v.pruned(1e-7)) == {0, 2}


def test_top_k_examples():
    assert top_k({0: 0.5, 1: 0.3, 2: 0.2}, 2) == [(0, 0.5), (1, 0.3)]
    assert top_k({0: 0.4, 1: 0.4, 2: 0.2}, 1) == [(0, 0.4)]
    assert top_k({3: 0.1, 1: 0.6, 2: 0.3}, 10) == [(1, 0.6), (2, 0.3), (3, 0.1)]
    assert top_k({5: 0.2, 2: 0.2, 9: 0.2}, 3) == [(2, 0.2), (5, 0.2), (9, 0.2)]


def test_top_k_rejects_zero():
    with pytest.raises(ValueError):
        top_k({0: 1.0}, 0)


def test_max_abs_diff():
    a = SparseVector({0: 0.5, 1: 0.5})
    b = SparseVector({0: 0.25, 2: 0.75})
    assert a.max_abs_diff(b) == pytest.approx(0.75)
    assert a.max_abs_diff(a) == 0.0


def test_total():
    rng = np.random.default_rng(1)
    vals = rng.random(50)
    assert SparseVector(dict(enumerate(vals))).total() == pytest.approx(vals.sum())
