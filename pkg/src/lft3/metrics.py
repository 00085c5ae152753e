"""Reconstruction accuracy over an evaluation entry set.

Both metrics sum and average over the same caller-supplied set.
"""

import numpy as np

from .model import FactorModel, predict_arrays
from .tensor import SparseTensor


def _residuals(m: FactorModel, eval_set: SparseTensor) -> np.ndarray:
    if len(eval_set) == 0:
        raise ValueError("evaluation set is empty")
    yhat = predict_arrays(m, eval_set.ii, eval_set.jj, eval_set.kk)
    return eval_set.values - yhat


def rmse(m: FactorModel, eval_set: SparseTensor) -> float:
    """sqrt(mean squared residual) over the evaluation entries."""
    r = _residuals(m, eval_set)
    return float(np.sqrt(np.mean(r * r)))


def mae(m: FactorModel, eval_set: SparseTensor) -> float:
    """Mean absolute residual over the evaluation entries."""
    r = _residuals(m, eval_set)
    return float(np.mean(np.abs(r)))
