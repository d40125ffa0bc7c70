import numpy as np
import pytest
from hypothesis import given, strategies as st

from cubefpp import hypercube as hc


def test_hamming_examples():
    assert hc.hamming_weight(hc.zero()) == 0
    assert hc.hamming_weight(hc.one(5)) == 5
    assert hc.hamming_weight(0b0110) == 2


def test_neighbors_examples():
    assert hc.neighbors(0, 2) == [0b01, 0b10]
    assert hc.neighbors(0b101, 3) == [0b100, 0b111, 0b001]


@given(st.integers(1, 20).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1))))
def test_neighbor_properties(nv):
    n, v = nv
    nb = hc.neighbors(v, n)
    assert len(nb) == n
    for i, w in enumerate(nb):
        assert abs(hc.hamming_weight(v) - hc.hamming_weight(w)) == 1
        assert hc.neighbors(w, n)[i] == v


def test_edge_index_examples():
    assert hc.edge_index(0, 0, 1) == 0
    idx = {hc.edge_index(b, d, 2) for d in range(2) for b in range(4) if not b >> d & 1}
    assert idx == {0, 1, 2, 3}


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8, 12])
def test_edge_index_bijection(n):
    seen = np.zeros(hc.edge_count(n), dtype=bool)
    for d in range(n):
        for b in range(1 << n):
            if b >> d & 1:
                continue
            i = hc.edge_index(b, d, n)
            assert not seen[i]
            seen[i] = True
            assert hc.edge_from_index(i, n) == (b, d)
    assert seen.all()


def test_malformed_edges_rejected():
    with pytest.raises(ValueError):
        hc.edge_index(0b1, 0, 2)
    with pytest.raises(ValueError):
        hc.edge_index(0, 3, 3)
    with pytest.raises(ValueError):
        hc.edge_index(8, 0, 3)
    with pytest.raises(ValueError):
        hc.edge_ref(0, 3)


def test_edge_ref_is_symmetric():
    assert hc.edge_ref(0b101, 0b100) == hc.edge_ref(0b100, 0b101) == (0b100, 0)


def test_dimension_cap():
    with pytest.raises(hc.DimensionError):
        hc.check_dimension(31)
    with pytest.raises(hc.DimensionError):
        hc.check_dimension(0)
    with pytest.raises(MemoryError):
        hc.check_dimension(30, bytes_per_edge=8, budget=2**30)
    assert hc.check_dimension(30) == 30
