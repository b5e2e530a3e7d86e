"""Packed symmetric matrices, 2x2 blocks, and the embedding maps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sddcp.symmat import (
    Block2,
    SymMatrix,
    dual_psd2_check,
    embed,
    extract,
    packed_index,
    packed_length,
    psd2_check,
    trace_inner,
)

M_SHIFTED_ONES = SymMatrix.from_dense(
    np.array([[6.0, 5.0, 5.0], [5.0, 6.0, 5.0], [5.0, 5.0, 6.0]])
)


def test_packed_length():
    assert packed_length(1) == 1
    assert packed_length(3) == 6
    assert packed_length(10) == 55


def test_packed_index_covers_upper_triangle():
    n = 5
    seen = set()
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            seen.add(packed_index(n, i, j))
    assert seen == set(range(packed_length(n)))


def test_symmetric_access():
    m = SymMatrix.from_dense(np.array([[1.0, 2.0], [2.0, 5.0]]))
    assert m.get(1, 2) == m.get(2, 1) == 2.0
    assert m.get(2, 2) == 5.0


def test_from_dense_rejects_asymmetric():
    with pytest.raises(ValueError):
        SymMatrix.from_dense(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_from_dense_round_trip():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(6, 6))
    sym = (a + a.T) / 2
    m = SymMatrix.from_dense(sym)
    assert np.allclose(m.dense(), sym)


def test_constructors():
    assert SymMatrix.identity(3).trace() == 3.0
    assert SymMatrix.zeros(4).norm() == 0.0
    assert SymMatrix.ones(2).get(1, 2) == 1.0
    r = SymMatrix.rank_one([1.0, 2.0])
    assert r.get(1, 2) == 2.0 and r.get(2, 2) == 4.0


def test_arithmetic():
    a = SymMatrix.identity(2)
    b = SymMatrix.ones(2)
    assert (a + b).get(1, 1) == 2.0
    assert (a - b).get(1, 2) == -1.0
    assert (2.0 * a).trace() == 4.0
    assert (-a).get(1, 1) == -1.0


def test_embed_examples():
    d = embed(Block2(1.0, 2.0, 3.0), 1, 3, 3)
    assert d.get(1, 1) == 1.0 and d.get(1, 3) == 2.0 and d.get(3, 3) == 3.0
    assert d.get(2, 2) == 0.0 and d.get(1, 2) == 0.0

    z = embed(Block2(0.0, 0.0, 0.0), 1, 2, 4)
    assert z.norm() == 0.0

    i2 = embed(Block2(1.0, 0.0, 1.0), 1, 2, 2)
    assert np.array_equal(i2.dense(), np.eye(2))


def test_embed_rejects_bad_indices():
    with pytest.raises(IndexError):
        embed(Block2(1.0, 0.0, 1.0), 2, 2, 3)
    with pytest.raises(IndexError):
        embed(Block2(1.0, 0.0, 1.0), 3, 1, 3)
    with pytest.raises(IndexError):
        embed(Block2(1.0, 0.0, 1.0), 1, 4, 3)


def test_extract_examples():
    b = extract(SymMatrix.identity(3), 1, 2)
    assert (b.s11, b.s12, b.s22) == (1.0, 0.0, 1.0)

    blk = Block2(1.5, -0.25, 2.0)
    assert extract(embed(blk, 2, 4, 5), 2, 4) == blk

    top = extract(M_SHIFTED_ONES, 1, 2)
    assert (top.s11, top.s12, top.s22) == (6.0, 5.0, 6.0)


def test_trace_inner_examples():
    i3 = SymMatrix.identity(3)
    assert trace_inner(i3, i3) == 3.0

    w = SymMatrix.from_dense(
        np.array([[1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    )
    assert trace_inner(w, M_SHIFTED_ONES) == -12.0

    v = SymMatrix.rank_one([1.0, 2.0])
    assert trace_inner(SymMatrix.ones(2), v) == pytest.approx(9.0)


def test_trace_inner_dimension_mismatch():
    with pytest.raises(ValueError):
        trace_inner(SymMatrix.identity(2), SymMatrix.identity(3))


def test_psd2_check_examples():
    assert psd2_check(Block2(1.0, 1.0, 1.0), 1e-8)
    assert not psd2_check(Block2(1.0, 2.0, 1.0), 1e-8)
    assert psd2_check(Block2(0.0, 0.0, 0.0), 1e-8)


def test_dual_psd2_check():
    # sum cone dual: diagonal nonneg, and determinant only binds when the
    # off-diagonal is negative
    assert dual_psd2_check(Block2(1.0, -1.0, 1.0), 1e-8)
    assert dual_psd2_check(Block2(1.0, 5.0, 1.0), 1e-8)
    assert not dual_psd2_check(Block2(1.0, -2.0, 1.0), 1e-8)
    assert not dual_psd2_check(Block2(-1.0, 0.0, 1.0), 1e-8)


small = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(
    s11=small,
    s12=small,
    s22=small,
    entries=st.lists(small, min_size=10, max_size=10),
    i=st.integers(min_value=1, max_value=4),
    j=st.integers(min_value=1, max_value=4),
)
def test_adjoint_identity(s11, s12, s22, entries, i, j):
    """trace_inner(embed(B), M) equals trace_inner(B, extract(M))."""
    if i == j:
        return
    lo, hi = min(i, j), max(i, j)
    b = Block2(s11, s12, s22)
    m = SymMatrix(4, np.array(entries, dtype=float))
    lhs = trace_inner(embed(b, lo, hi, 4), m)
    got = extract(m, lo, hi)
    rhs = b.s11 * got.s11 + 2.0 * b.s12 * got.s12 + b.s22 * got.s22
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_embed_linearity():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = Block2(*rng.normal(size=3))
        b = Block2(*rng.normal(size=3))
        c = float(rng.uniform(0.1, 3.0))
        lhs = embed(
            Block2(a.s11 + c * b.s11, a.s12 + c * b.s12, a.s22 + c * b.s22),
            2,
            3,
            4,
        )
        rhs = embed(a, 2, 3, 4) + c * embed(b, 2, 3, 4)
        assert np.allclose(lhs.dense(), rhs.dense(), atol=1e-12)


def test_block_array_round_trip():
    blk = Block2(1.0, 0.5, 2.0)
    assert Block2.from_array(blk.as_array()) == blk
