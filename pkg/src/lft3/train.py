"""Per-entry stochastic gradient descent with validation-based early stopping.

One epoch visits every training entry exactly once, in a deterministic
shuffle keyed by (seed, epoch). For each entry the residual is computed
from the current factors, then all three touched rows are updated
simultaneously from their pre-update values:

    u_ir <- u_ir - eta * (g * s_jr * t_kr + lam * u_ir)
    s_jr <- s_jr - eta * (g * u_ir * t_kr + lam * s_jr)
    t_kr <- t_kr - eta * (g * u_ir * s_jr + lam * t_kr)

with g from loss.entry_grad_coeff. Training halts when the epoch cap is
reached or when the signed reduction in validation error between two
successive epochs falls below tol; a validation-error increase therefore
also stops training.

The inner pass is JIT-compiled with numba when available and runs as plain
Python otherwise; both paths execute the identical statements.
"""

import time
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .loss import L2, TDW, LossSpec, entry_grad_coeff, total_loss
from .metrics import mae, rmse
from .model import FactorModel, predict_entry
from .rng import make_rng
from .tensor import SparseTensor

RMSE = "rmse"
MAE = "mae"

STOP_MAX_EPOCHS = "max_epochs"
STOP_CONVERGED = "converged"


class DivergenceError(RuntimeError):
    """A factor element became non-finite during an update."""


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters and protocol knobs for one training run.

    eta may be zero (the update is then the identity, useful for testing);
    train() itself requires eta > 0.
    """

    eta: float
    lam: float = 0.0
    max_epochs: int = 1000
    tol: float = 1e-5
    seed: int = 0
    shuffle: bool = True
    stop_metric: str = RMSE

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not (self.tol > 0):
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.stop_metric not in (RMSE, MAE):
            raise ValueError(f"stop_metric must be {RMSE!r} or {MAE!r}")


@dataclass
class TrainReport:
    """Per-epoch validation trace and stop bookkeeping for one run."""

    epochs_run: int
    val_trace: List[Tuple[int, float, float]]  # (epoch, val_rmse, val_mae)
    stop_reason: str
    wall_time_seconds: float
    epoch_seconds: List[float] = field(default_factory=list)  # cumulative

    def best_epoch(self, metric: str = RMSE) -> int:
        col = 1 if metric == RMSE else 2
        values = [row[col] for row in self.val_trace]
        return self.val_trace[int(np.argmin(values))][0]

    def time_to_best(self, metric: str = RMSE) -> float:
        """Cumulative wall-clock seconds to the best-validation epoch."""
        best = self.best_epoch(metric)
        return self.epoch_seconds[best - self.val_trace[0][0]]


def _entry_pass(U, S, T, ii, jj, kk, vals, tdist, order, eta, lam, kind):
    # kind: 0 = l2, 1 = threshold-weighted. tdist[n] = |y_n - tau|.
    # Returns the position of the first entry whose update produced a
    # non-finite factor, or -1.
    R = U.shape[1]
    for p in range(order.shape[0]):
        n = order[p]
        i = ii[n]
        j = jj[n]
        k = kk[n]
        yhat = 0.0
        for r in range(R):
            yhat += U[i, r] * S[j, r] * T[k, r]
        delta = vals[n] - yhat
        if kind == 0:
            g = -delta
        else:
            w = tdist[n]
            if abs(delta) >= w:
                g = -2.0 * delta
            elif delta > 0.0:
                g = -w
            elif delta < 0.0:
                g = w
            else:
                g = 0.0
        acc = 0.0
        for r in range(R):
            u = U[i, r]
            s = S[j, r]
            t = T[k, r]
            nu = u - eta * (g * s * t + lam * u)
            ns = s - eta * (g * u * t + lam * s)
            nt = t - eta * (g * u * s + lam * t)
            U[i, r] = nu
            S[j, r] = ns
            T[k, r] = nt
            acc += nu + ns + nt
        if not np.isfinite(acc):
            return n
    return -1


try:
    from numba import njit

    _entry_pass = njit(cache=True)(_entry_pass)
except ImportError:  # pragma: no cover - numba is a declared dependency
    pass


def epoch_order(n_entries: int, seed: int, epoch: int, shuffle: bool) -> np.ndarray:
    """Visit order for one epoch: a (seed, epoch)-keyed permutation, or
    insertion order when shuffling is disabled."""
    if shuffle:
        return make_rng(seed, epoch).permutation(n_entries)
    return np.arange(n_entries, dtype=np.int64)


def _kind_code(spec: LossSpec) -> int:
    return 0 if spec.kind == L2 else 1


def _threshold_distances(spec: LossSpec, values: np.ndarray) -> np.ndarray:
    if spec.kind == TDW:
        return np.abs(values - spec.tau)
    return np.zeros_like(values)


def sgd_epoch(
    m: FactorModel,
    train_set: SparseTensor,
    spec: LossSpec,
    cfg: TrainConfig,
    epoch: int,
) -> FactorModel:
    """One full pass over the training entries; returns the updated model.

    The input model is left untouched. Raises DivergenceError if any factor
    element becomes non-finite.
    """
    if train_set.dims != m.dims:
        raise ValueError(f"train dims {train_set.dims} do not match model dims {m.dims}")
    if spec.lam != cfg.lam:
        raise ValueError(f"spec.lam={spec.lam} and cfg.lam={cfg.lam} must agree")
    out = m.copy()
    order = epoch_order(len(train_set), cfg.seed, epoch, cfg.shuffle)
    tdist = _threshold_distances(spec, train_set.values)
    bad = _entry_pass(
        out.U, out.S, out.T,
        train_set.ii, train_set.jj, train_set.kk, train_set.values,
        tdist, order, float(cfg.eta), float(cfg.lam), _kind_code(spec),
    )
    if bad >= 0:
        idx = (int(train_set.ii[bad]), int(train_set.jj[bad]), int(train_set.kk[bad]))
        raise DivergenceError(f"non-finite factor after update at epoch {epoch}, entry {idx}")
    return out


def train(
    m: FactorModel,
    train_set: SparseTensor,
    val_set: SparseTensor,
    spec: LossSpec,
    cfg: TrainConfig,
    keep_best: bool = False,
) -> Tuple[FactorModel, TrainReport]:
    """SGD epochs with early stopping on the validation stop metric.

    Stops when (previous - current) validation error < tol, or at
    max_epochs. Returns the final-epoch model (or, with keep_best, the
    snapshot from the best-validation epoch) plus the full trace.
    """
    if len(val_set) == 0:
        raise ValueError("validation set is empty")
    if not (cfg.eta > 0):
        raise ValueError("training requires eta > 0")
    if val_set.dims != m.dims:
        raise ValueError(f"val dims {val_set.dims} do not match model dims {m.dims}")

    t0 = time.perf_counter()
    trace: List[Tuple[int, float, float]] = []
    elapsed: List[float] = []
    prev = None
    stop_reason = STOP_MAX_EPOCHS
    best_err = np.inf
    best_model = None

    current = m
    epochs_run = 0
    for epoch in range(1, cfg.max_epochs + 1):
        current = sgd_epoch(current, train_set, spec, cfg, epoch)
        vr = rmse(current, val_set)
        vm = mae(current, val_set)
        trace.append((epoch, vr, vm))
        elapsed.append(time.perf_counter() - t0)
        epochs_run = epoch
        err = vr if cfg.stop_metric == RMSE else vm
        if keep_best and err < best_err:
            best_err = err
            best_model = current
        if prev is not None and (prev - err) < cfg.tol:
            stop_reason = STOP_CONVERGED
            break
        prev = err

    report = TrainReport(
        epochs_run=epochs_run,
        val_trace=trace,
        stop_reason=stop_reason,
        wall_time_seconds=time.perf_counter() - t0,
        epoch_seconds=elapsed,
    )
    result = best_model if (keep_best and best_model is not None) else current
    return result, report


def numeric_gradient_check(spec: LossSpec, trials: int, seed: int = 0) -> float:
    """Worst relative error of the analytic update direction vs central
    finite differences of the full objective, over random tiny problems.

    Each trial draws a model (rank <= 3, dims <= 4) and a single observed
    entry, then compares g*s*t + lam*u (and the two symmetric forms)
    against (L(theta+h) - L(theta-h)) / 2h of total_loss on that entry.
    Samples within 1e-4 of a branch boundary (|delta| near |y - tau| or
    near 0) are redrawn, as the objective is not differentiable there.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = make_rng(seed)
    h = 1e-6
    worst = 0.0
    accepted = 0
    attempts = 0
    max_attempts = 1000 * trials
    while accepted < trials:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("could not draw enough off-boundary samples")
        dims = tuple(int(d) for d in rng.integers(1, 5, size=3))
        rank = int(rng.integers(1, 4))
        model = FactorModel(
            rng.uniform(0.1, 1.1, (dims[0], rank)),
            rng.uniform(0.1, 1.1, (dims[1], rank)),
            rng.uniform(0.1, 1.1, (dims[2], rank)),
        )
        idx = (
            int(rng.integers(0, dims[0])),
            int(rng.integers(0, dims[1])),
            int(rng.integers(0, dims[2])),
        )
        yhat = predict_entry(model, idx)
        d = float(rng.uniform(0.05, 2.0)) * (1.0 if rng.random() < 0.5 else -1.0)
        y = yhat + d
        delta = y - yhat
        if abs(delta) < 1e-4:
            continue
        if spec.kind == TDW and abs(abs(delta) - abs(y - spec.tau)) < 1e-4:
            continue
        data = SparseTensor(dims, [idx[0]], [idx[1]], [idx[2]], [y])
        g = entry_grad_coeff(spec, y, yhat)
        i, j, k = idx
        for mat, row, partner in (
            (model.U, i, model.S[j] * model.T[k]),
            (model.S, j, model.U[i] * model.T[k]),
            (model.T, k, model.U[i] * model.S[j]),
        ):
            for r in range(rank):
                analytic = g * float(partner[r]) + spec.lam * float(mat[row, r])
                orig = float(mat[row, r])
                mat[row, r] = orig + h
                lp = total_loss(model, data, spec)
                mat[row, r] = orig - h
                lm = total_loss(model, data, spec)
                mat[row, r] = orig
                fd = (lp - lm) / (2.0 * h)
                rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-10)
                worst = max(worst, rel)
        accepted += 1
    return worst
