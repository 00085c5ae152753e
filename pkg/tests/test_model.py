"""Factor model initialisation and entry reconstruction."""

import numpy as np
import pytest

from lft3 import FactorModel, init_model, predict_entry, predict_many, predict_arrays
from lft3.rng import make_rng


def test_init_deterministic():
    a = init_model((5, 4, 3), 2, seed=7, scale=0.05)
    b = init_model((5, 4, 3), 2, seed=7, scale=0.05)
    assert np.array_equal(a.U, b.U)
    assert np.array_equal(a.S, b.S)
    assert np.array_equal(a.T, b.T)


def test_init_differs_across_seeds():
    a = init_model((5, 4, 3), 2, seed=7)
    b = init_model((5, 4, 3), 2, seed=8)
    assert not np.array_equal(a.U, b.U)


def test_init_range():
    m = init_model((20, 20, 20), 4, seed=3, scale=0.05)
    for mat in (m.U, m.S, m.T):
        assert (mat > 0).all() and (mat < 0.05).all()


def test_init_paper_scale_shapes():
    m = init_model((214, 144, 61), 20, seed=0)
    assert m.U.shape == (214, 20)
    assert m.S.shape == (144, 20)
    assert m.T.shape == (61, 20)
    assert m.rank == 20


def test_init_rejects_degenerate():
    with pytest.raises(ValueError):
        init_model((5, 4, 3), 0, seed=0)
    with pytest.raises(ValueError):
        init_model((0, 4, 3), 2, seed=0)


def test_predict_all_ones():
    m = FactorModel(np.ones((2, 5)), np.ones((3, 5)), np.ones((4, 5)))
    assert predict_entry(m, (0, 0, 0)) == 5.0


def test_predict_hand_computed():
    """u=(1,2), s=(3,4), t=(5,6) -> 1*3*5 + 2*4*6 = 63."""
    m = FactorModel(
        np.array([[1.0, 2.0]]), np.array([[3.0, 4.0]]), np.array([[5.0, 6.0]])
    )
    assert predict_entry(m, (0, 0, 0)) == 63.0


def test_predict_zero_row_annihilates():
    m = init_model((3, 4, 5), 2, seed=1)
    U = m.U.copy()
    U[1] = 0.0
    m2 = FactorModel(U, m.S, m.T)
    for j in range(4):
        for k in range(5):
            assert predict_entry(m2, (1, j, k)) == 0.0


def test_predict_many_empty_and_singleton():
    m = init_model((3, 3, 3), 2, seed=2)
    assert predict_many(m, []).shape == (0,)
    out = predict_many(m, [(1, 2, 0)])
    assert out.shape == (1,)
    assert out[0] == predict_entry(m, (1, 2, 0))


def test_predict_many_matches_individual_calls():
    m = init_model((6, 5, 4), 3, seed=9, scale=1.0)
    idxs = [(0, 0, 0), (5, 4, 3), (2, 1, 3)]
    batch = predict_many(m, idxs)
    assert list(batch) == [predict_entry(m, idx) for idx in idxs]


def test_predict_out_of_range():
    m = init_model((3, 3, 3), 2, seed=2)
    with pytest.raises(ValueError, match="out of range"):
        predict_entry(m, (3, 0, 0))
    with pytest.raises(ValueError, match="out of range"):
        predict_arrays(m, [0], [0], [-1])


def test_scale_invariance_of_parameterisation():
    """Scaling column r of U by c and of S by 1/c keeps predictions."""
    for seed in range(10):
        rng = make_rng(seed)
        m = init_model((4, 4, 4), 3, seed=seed, scale=1.0)
        c = float(rng.uniform(0.2, 5.0))
        r = int(rng.integers(0, 3))
        U = m.U.copy()
        S = m.S.copy()
        U[:, r] *= c
        S[:, r] /= c
        scaled = FactorModel(U, S, m.T)
        idxs = [(i, j, k) for i in range(4) for j in range(4) for k in range(4)]
        np.testing.assert_allclose(
            predict_many(scaled, idxs), predict_many(m, idxs), rtol=1e-12
        )


def test_rank_r_equals_sum_of_rank_ones():
    """Full-rank prediction is the sum of the per-column rank-1 predictions."""
    m = init_model((4, 3, 5), 4, seed=11, scale=1.0)
    idxs = [(i, j, k) for i in range(4) for j in range(3) for k in range(5)]
    full = predict_many(m, idxs)
    parts = np.zeros(len(idxs))
    for r in range(4):
        mr = FactorModel(m.U[:, r:r + 1], m.S[:, r:r + 1], m.T[:, r:r + 1])
        parts += predict_many(mr, idxs)
    np.testing.assert_allclose(full, parts, rtol=1e-12, atol=1e-15)


def test_factor_model_validation():
    with pytest.raises(ValueError, match="share one rank"):
        FactorModel(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 2)))
    with pytest.raises(ValueError, match="non-finite"):
        FactorModel(np.array([[np.inf]]), np.ones((1, 1)), np.ones((1, 1)))
