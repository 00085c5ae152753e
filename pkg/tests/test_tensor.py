"""Sparse tensor construction, validation, density, and median."""

import numpy as np
import pytest

from lft3 import EntryIndex, SparseTensor, build_tensor, density, median_value
from lft3.rng import make_rng


def test_build_minimal():
    t = build_tensor((2, 2, 2), [((0, 0, 0), 1.0)])
    assert len(t) == 1
    assert t.dims == (2, 2, 2)
    assert list(t.entries()) == [(EntryIndex(0, 0, 0), 1.0)]


def test_build_duplicate_index_rejected():
    with pytest.raises(ValueError, match=r"duplicate.*\(0,0,0\)"):
        build_tensor((2, 2, 2), [((0, 0, 0), 1.0), ((0, 0, 0), 2.0)])


def test_build_out_of_range_rejected():
    with pytest.raises(ValueError, match="out of range"):
        build_tensor((2, 2, 2), [((2, 0, 0), 1.0)])
    with pytest.raises(ValueError, match="out of range"):
        build_tensor((2, 2, 2), [((0, -1, 0), 1.0)])


def test_build_non_finite_rejected():
    with pytest.raises(ValueError, match="non-finite"):
        build_tensor((2, 2, 2), [((0, 0, 0), float("nan"))])
    with pytest.raises(ValueError, match="non-finite"):
        build_tensor((2, 2, 2), [((0, 1, 0), float("inf"))])


def test_build_zero_dim_rejected():
    with pytest.raises(ValueError, match="dims"):
        build_tensor((0, 2, 2), [])


def test_build_insertion_order_preserved():
    pairs = [((1, 0, 1), 3.0), ((0, 0, 0), 1.0), ((1, 1, 1), 2.0)]
    t = build_tensor((2, 2, 2), pairs)
    assert [(tuple(idx), v) for idx, v in t.entries()] == [
        ((1, 0, 1), 3.0), ((0, 0, 0), 1.0), ((1, 1, 1), 2.0)
    ]


def test_tensor_immutable():
    t = build_tensor((2, 2, 2), [((0, 0, 0), 1.0)])
    with pytest.raises((ValueError, AttributeError)):
        t.values[0] = 5.0
    with pytest.raises(AttributeError):
        t.dims = (3, 3, 3)


def test_guangzhou_shape_accepted():
    """214 x 144 x 61 with 1,855,589 distinct entries validates cleanly."""
    dims = (214, 144, 61)
    total = dims[0] * dims[1] * dims[2]
    n = 1_855_589
    rng = make_rng(0)
    lin = rng.choice(total, size=n, replace=False)
    kk = lin % dims[2]
    jj = (lin // dims[2]) % dims[1]
    ii = lin // (dims[1] * dims[2])
    t = SparseTensor(dims, ii, jj, kk, np.full(n, 30.0), validate=True)
    assert len(t) == n
    assert round(density(t), 3) == 0.987


def test_density_zero_and_full():
    empty = build_tensor((2, 2, 2), [])
    assert density(empty) == 0.0
    full = build_tensor(
        (2, 2, 2),
        [((i, j, k), 1.0) for i in range(2) for j in range(2) for k in range(2)],
    )
    assert density(full) == 1.0


def test_median_odd_even_singleton():
    assert median_value([3, 1, 2]) == 2
    assert median_value([1, 2, 3, 4]) == 2.5
    assert median_value([7]) == 7


def test_median_empty_rejected():
    with pytest.raises(ValueError):
        median_value([])


def test_median_permutation_invariant():
    for seed in range(20):
        rng = make_rng(seed)
        vals = rng.normal(0, 10, size=int(rng.integers(1, 40)))
        assert median_value(vals) == median_value(rng.permutation(vals))


def test_median_shift_equivariant():
    """median(x + c) = median(x) + c for any constant c."""
    for seed in range(20):
        rng = make_rng(seed, 1)
        vals = rng.normal(0, 5, size=int(rng.integers(1, 30)))
        c = float(rng.normal(0, 100))
        assert median_value(vals + c) == pytest.approx(median_value(vals) + c, abs=1e-9)


def test_subset_and_with_values():
    t = build_tensor((3, 3, 3), [((0, 0, 0), 1.0), ((1, 1, 1), 2.0), ((2, 2, 2), 3.0)])
    sub = t.subset(np.array([2, 0]))
    assert [v for _, v in sub.entries()] == [3.0, 1.0]
    replaced = t.with_values(np.array([9.0, 8.0, 7.0]))
    assert list(replaced.values) == [9.0, 8.0, 7.0]
    with pytest.raises(ValueError):
        t.with_values(np.array([1.0, np.nan, 3.0]))
