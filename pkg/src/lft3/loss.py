"""Per-entry losses and gradient coefficients for the two objectives.

Both objectives are defined over observed entries only. With the residual
delta = y - yhat:

  L2 baseline:      loss = 0.5 * delta^2
  threshold loss:   loss = delta^2                    if |delta| >= |y - tau|
                           |y - tau| * |delta|        otherwise

tau is the median of the training values, so each sample's branch boundary
is its own distance from the median. The two branches agree exactly at
|delta| = |y - tau|. Note the asymmetric conventions, kept as defined: the
threshold loss's squared region carries no 1/2 factor (gradient -2*delta)
while the L2 baseline does (gradient -delta), and samples far from the
median receive large absolute-branch weights, the reverse of Huber-style
down-weighting.

Each function returns the data term only; Tikhonov regularization enters in
total_loss, summed per observed entry:

  total = sum entry_loss + (lam/2) * sum_{(i,j,k) observed} sum_r (u_ir^2 + s_jr^2 + t_kr^2)

so an entity's row is penalized once per observation of that entity
(instance-frequency weighting).

The gradient coefficient g is defined so the data-term partial derivative
w.r.t. u_ir is g * s_jr * t_kr (and symmetrically for s_jr, t_kr); it also
equals d(entry_loss)/d(yhat).
"""

from dataclasses import dataclass
from typing import Optional

import math

import numpy as np

from .model import FactorModel, predict_arrays
from .tensor import SparseTensor, median_value

L2 = "l2"
TDW = "tdw"
_KINDS = (L2, TDW)


@dataclass(frozen=True)
class LossSpec:
    """Loss kind, Tikhonov coefficient lam >= 0, and threshold tau.

    tau is required (and must be finite) for the threshold-weighted kind;
    it is ignored for plain L2.
    """

    kind: str
    lam: float = 0.0
    tau: Optional[float] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}, expected one of {_KINDS}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.kind == TDW:
            if self.tau is None or not math.isfinite(self.tau):
                raise ValueError("tdw loss requires a finite tau")


def compute_tau(train: SparseTensor) -> float:
    """Branch threshold: median of the training-split values.

    Computed on the training split only; using validation or test values
    would leak evaluation data into the objective.
    """
    if len(train) == 0:
        raise ValueError("cannot compute tau of an empty training set")
    return median_value(train.values)


def entry_loss(spec: LossSpec, y: float, yhat: float) -> float:
    """Data-term loss of one observation (no regularization)."""
    delta = y - yhat
    if spec.kind == L2:
        return 0.5 * delta * delta
    w = abs(y - spec.tau)
    if abs(delta) >= w:
        return delta * delta
    return w * abs(delta)


def entry_grad_coeff(spec: LossSpec, y: float, yhat: float) -> float:
    """Coefficient g with d(data term)/d(u_ir) = g * s_jr * t_kr.

    L2: g = -delta. Threshold loss: g = -2*delta on the squared branch,
    g = -|y - tau| * sign(delta) on the absolute branch, with sign(0) = 0
    so a perfect fit is a stationary no-op.
    """
    delta = y - yhat
    if spec.kind == L2:
        return -delta
    w = abs(y - spec.tau)
    if abs(delta) >= w:
        return -2.0 * delta
    if delta > 0.0:
        return -w
    if delta < 0.0:
        return w
    return 0.0


def total_loss(m: FactorModel, data: SparseTensor, spec: LossSpec) -> float:
    """Objective over all observed entries: data terms plus Tikhonov term."""
    if data.dims != m.dims:
        raise ValueError(f"tensor dims {data.dims} do not match model dims {m.dims}")
    if len(data) == 0:
        return 0.0
    yhat = predict_arrays(m, data.ii, data.jj, data.kk)
    delta = data.values - yhat
    if spec.kind == L2:
        data_term = 0.5 * float(np.dot(delta, delta))
    else:
        w = np.abs(data.values - spec.tau)
        sq = np.abs(delta) >= w
        data_term = float(np.where(sq, delta * delta, w * np.abs(delta)).sum())
    reg = 0.0
    if spec.lam > 0.0:
        rows = (
            float((m.U[data.ii] ** 2).sum())
            + float((m.S[data.jj] ** 2).sum())
            + float((m.T[data.kk] ** 2).sum())
        )
        reg = 0.5 * spec.lam * rows
    return data_term + reg
