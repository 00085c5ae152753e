"""Sparse third-order tensor completion by latent factorization.

Core pieces: a coordinate-list tensor of observed entries, a rank-R
three-factor model, an L2 and a robust threshold-distance-weighted
objective, a per-entry SGD trainer with validation early stopping, and
RMSE/MAE evaluation. The CLI (lft3) runs the full split/train/test
pipeline on COO text files.
"""

from .tensor import EntryIndex, SparseTensor, build_tensor, density, median_value
from .model import (
    DEFAULT_INIT_SCALE,
    DEFAULT_INIT_SEED,
    FactorModel,
    init_model,
    predict_arrays,
    predict_entry,
    predict_many,
)
from .loss import L2, TDW, LossSpec, compute_tau, entry_grad_coeff, entry_loss, total_loss
from .metrics import mae, rmse
from .train import (
    MAE,
    RMSE,
    STOP_CONVERGED,
    STOP_MAX_EPOCHS,
    DivergenceError,
    TrainConfig,
    TrainReport,
    epoch_order,
    numeric_gradient_check,
    sgd_epoch,
    train,
)
from .data import (
    OutlierPlan,
    ParseError,
    SplitSets,
    generate_synthetic,
    inject_outliers,
    parse_coo_text,
    parse_model_text,
    read_coo_file,
    read_model_file,
    split_dataset,
    write_coo_file,
    write_coo_text,
    write_model_file,
    write_model_text,
)

__version__ = "0.1.0"

__all__ = [
    "EntryIndex", "SparseTensor", "build_tensor", "density", "median_value",
    "FactorModel", "init_model", "predict_entry", "predict_many", "predict_arrays",
    "DEFAULT_INIT_SCALE", "DEFAULT_INIT_SEED",
    "L2", "TDW", "LossSpec", "compute_tau", "entry_loss", "entry_grad_coeff", "total_loss",
    "rmse", "mae", "RMSE", "MAE",
    "TrainConfig", "TrainReport", "DivergenceError", "epoch_order", "sgd_epoch",
    "train", "numeric_gradient_check", "STOP_CONVERGED", "STOP_MAX_EPOCHS",
    "SplitSets", "OutlierPlan", "ParseError",
    "parse_coo_text", "write_coo_text", "read_coo_file", "write_coo_file",
    "split_dataset", "generate_synthetic", "inject_outliers",
    "parse_model_text", "write_model_text", "read_model_file", "write_model_file",
    "__version__",
]
