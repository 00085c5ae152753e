"""Loss values, gradient coefficients, threshold behaviour, regularization."""

import numpy as np
import pytest

from lft3 import (
    L2,
    TDW,
    FactorModel,
    LossSpec,
    build_tensor,
    compute_tau,
    entry_grad_coeff,
    entry_loss,
    init_model,
    total_loss,
)
from lft3.rng import make_rng


# ---------------------------------------------------------------- tau

def test_tau_median_of_three():
    t = build_tensor((3, 1, 1), [((0, 0, 0), 3.0), ((1, 0, 0), 1.0), ((2, 0, 0), 2.0)])
    assert compute_tau(t) == 2.0


def test_tau_constant_data():
    t = build_tensor((3, 1, 1), [((i, 0, 0), 4.5) for i in range(3)])
    assert compute_tau(t) == 4.5


def test_tau_even_count():
    t = build_tensor((4, 1, 1), [((i, 0, 0), v) for i, v in enumerate([10, 20, 30, 40])])
    assert compute_tau(t) == 25.0


def test_tau_empty_rejected():
    t = build_tensor((2, 2, 2), [])
    with pytest.raises(ValueError):
        compute_tau(t)


# ---------------------------------------------------------------- entry_loss

def test_tdw_squared_branch():
    """y=5, tau=3, yhat=1: delta=4 >= |y-tau|=2 -> delta^2 = 16."""
    spec = LossSpec(TDW, 0.0, tau=3.0)
    assert entry_loss(spec, 5.0, 1.0) == 16.0


def test_tdw_absolute_branch():
    """y=5, tau=3, yhat=4.5: delta=0.5 < 2 -> 2 * 0.5 = 1.0."""
    spec = LossSpec(TDW, 0.0, tau=3.0)
    assert entry_loss(spec, 5.0, 4.5) == 1.0


def test_tdw_y_equals_tau_always_squared():
    """|y-tau|=0 forces the squared branch: loss = delta^2."""
    spec = LossSpec(TDW, 0.0, tau=5.0)
    for yhat in (2.0, 5.0, 7.25):
        delta = 5.0 - yhat
        assert entry_loss(spec, 5.0, yhat) == delta * delta


def test_l2_perfect_fit_and_half_factor():
    spec = LossSpec(L2, 0.0)
    assert entry_loss(spec, 3.0, 3.0) == 0.0
    assert entry_loss(spec, 5.0, 3.0) == 2.0  # 0.5 * 2^2


def test_entry_loss_nonnegative_zero_iff_perfect():
    for seed in range(50):
        rng = make_rng(seed)
        y, tau, yhat = (float(v) for v in rng.normal(0, 3, 3))
        for spec in (LossSpec(L2, 0.0), LossSpec(TDW, 0.0, tau=tau)):
            val = entry_loss(spec, y, yhat)
            assert val >= 0.0
            assert (val == 0.0) == (y == yhat)
        assert entry_loss(LossSpec(TDW, 0.0, tau=tau), y, y) == 0.0


def test_tdw_continuity_at_branch_boundary():
    """At |delta| = |y - tau| the two branch formulas agree to 1e-12."""
    rng = make_rng(99)
    for _ in range(1000):
        y = float(rng.uniform(-50, 50))
        tau = float(rng.uniform(-50, 50))
        # yhat = tau puts delta = y - tau exactly on the boundary
        delta = y - tau
        squared = delta * delta
        weighted = abs(y - tau) * abs(delta)
        assert abs(squared - weighted) < 1e-12
        assert entry_loss(LossSpec(TDW, 0.0, tau=tau), y, tau) == squared


def test_tdw_monotone_in_abs_delta():
    for seed in range(20):
        rng = make_rng(seed, 5)
        y = float(rng.uniform(-10, 10))
        tau = float(rng.uniform(-10, 10))
        spec = LossSpec(TDW, 0.0, tau=tau)
        mags = np.sort(rng.uniform(0, 8, 40))
        sign = 1.0 if rng.random() < 0.5 else -1.0
        losses = [entry_loss(spec, y, y - sign * m) for m in mags]
        assert all(b >= a - 1e-15 for a, b in zip(losses, losses[1:]))


# ---------------------------------------------------------------- gradient coefficient

def test_grad_coeff_squared_branch():
    """delta=4 on the squared branch -> g = -2*delta = -8."""
    spec = LossSpec(TDW, 0.0, tau=3.0)
    assert entry_grad_coeff(spec, 5.0, 1.0) == -8.0


def test_grad_coeff_absolute_branch():
    """y=5, tau=3, delta=0.5 -> g = -|y-tau|*sign(delta) = -2."""
    spec = LossSpec(TDW, 0.0, tau=3.0)
    assert entry_grad_coeff(spec, 5.0, 4.5) == -2.0


def test_grad_coeff_zero_at_perfect_fit():
    assert entry_grad_coeff(LossSpec(L2, 0.0), 4.0, 4.0) == 0.0
    assert entry_grad_coeff(LossSpec(TDW, 0.0, tau=1.0), 4.0, 4.0) == 0.0


def test_grad_coeff_l2():
    assert entry_grad_coeff(LossSpec(L2, 0.0), 5.0, 3.0) == -2.0  # -delta


def test_grad_coeff_matches_finite_difference():
    """g equals d(entry_loss)/d(yhat), checked by central differences
    away from the branch boundary and from delta=0."""
    h = 1e-6
    rng = make_rng(4)
    checked = 0
    while checked < 500:
        y = float(rng.uniform(-5, 5))
        tau = float(rng.uniform(-5, 5))
        yhat = float(rng.uniform(-5, 5))
        delta = y - yhat
        if abs(delta) < 1e-4 or abs(abs(delta) - abs(y - tau)) < 1e-4:
            continue
        for spec in (LossSpec(L2, 0.0), LossSpec(TDW, 0.0, tau=tau)):
            fd = (entry_loss(spec, y, yhat + h) - entry_loss(spec, y, yhat - h)) / (2 * h)
            g = entry_grad_coeff(spec, y, yhat)
            assert abs(fd - g) / max(abs(fd), abs(g), 1e-10) < 1e-5
        checked += 1


# ---------------------------------------------------------------- total_loss

def test_total_loss_zero_on_perfect_fit():
    m = FactorModel(np.ones((2, 1)), np.ones((2, 1)), np.ones((2, 1)))
    t = build_tensor((2, 2, 2), [((0, 0, 0), 1.0), ((1, 1, 1), 1.0)])
    assert total_loss(m, t, LossSpec(L2, 0.0)) == 0.0


def test_total_loss_single_entry_l2():
    """delta=2, lam=0 -> 0.5 * 4 = 2."""
    m = FactorModel(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)))
    t = build_tensor((1, 1, 1), [((0, 0, 0), 3.0)])
    assert total_loss(m, t, LossSpec(L2, 0.0)) == 2.0


def test_total_loss_regularization_accounting():
    """Perfect fit, lam=2, R=1, u=s=t=1 -> (2/2)*(1+1+1) = 3."""
    m = FactorModel(np.ones((1, 1)), np.ones((1, 1)), np.ones((1, 1)))
    t = build_tensor((1, 1, 1), [((0, 0, 0), 1.0)])
    assert total_loss(m, t, LossSpec(L2, 2.0)) == 3.0


def test_total_loss_dimension_mismatch():
    m = init_model((2, 2, 2), 1, seed=0)
    t = build_tensor((3, 3, 3), [((0, 0, 0), 1.0)])
    with pytest.raises(ValueError, match="dims"):
        total_loss(m, t, LossSpec(L2, 0.0))


def test_total_loss_matches_entrywise_sum():
    """Vectorised objective equals scalar per-entry losses plus the
    per-observation Tikhonov term."""
    for seed in range(8):
        rng = make_rng(seed, 7)
        m = init_model((4, 3, 5), 2, seed=seed, scale=1.0)
        n = 20
        idxs = []
        seen = set()
        while len(idxs) < n:
            c = (int(rng.integers(0, 4)), int(rng.integers(0, 3)), int(rng.integers(0, 5)))
            if c not in seen:
                seen.add(c)
                idxs.append(c)
        t = build_tensor((4, 3, 5), [(c, float(rng.uniform(-2, 4))) for c in idxs])
        tau = float(rng.uniform(-1, 2))
        for spec in (LossSpec(L2, 0.3), LossSpec(TDW, 0.3, tau=tau)):
            expected = 0.0
            for (i, j, k), y in t.entries():
                yhat = float(np.dot(m.U[i] * m.S[j], m.T[k]))
                expected += entry_loss(spec, y, yhat)
                expected += 0.5 * spec.lam * float(
                    (m.U[i] ** 2).sum() + (m.S[j] ** 2).sum() + (m.T[k] ** 2).sum()
                )
            assert total_loss(m, t, spec) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------- spec validation

def test_loss_spec_validation():
    with pytest.raises(ValueError, match="kind"):
        LossSpec("huber", 0.0)
    with pytest.raises(ValueError, match="lam"):
        LossSpec(L2, -0.1)
    with pytest.raises(ValueError, match="tau"):
        LossSpec(TDW, 0.0)
    with pytest.raises(ValueError, match="tau"):
        LossSpec(TDW, 0.0, tau=float("inf"))
