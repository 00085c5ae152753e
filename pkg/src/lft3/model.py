"""Rank-R latent factor model: three factor matrices and entry reconstruction.

An observed tensor Y is approximated entrywise by

    yhat_ijk = sum_r U[i, r] * S[j, r] * T[k, r]

i.e. a sum of R rank-one tensors u_r o s_r o t_r. Factors are unconstrained
reals; no non-negativity is imposed.
"""

from typing import Sequence, Tuple

import numpy as np

from .rng import make_rng

DEFAULT_INIT_SCALE = 0.05
DEFAULT_INIT_SEED = 42


class FactorModel:
    """Factor matrices U (dimI x R), S (dimJ x R), T (dimK x R)."""

    __slots__ = ("U", "S", "T")

    def __init__(self, U: np.ndarray, S: np.ndarray, T: np.ndarray):
        U = np.ascontiguousarray(U, dtype=np.float64)
        S = np.ascontiguousarray(S, dtype=np.float64)
        T = np.ascontiguousarray(T, dtype=np.float64)
        if U.ndim != 2 or S.ndim != 2 or T.ndim != 2:
            raise ValueError("factor matrices must be 2-D")
        if not (U.shape[1] == S.shape[1] == T.shape[1]):
            raise ValueError(
                f"factor matrices must share one rank, got "
                f"{U.shape[1]}, {S.shape[1]}, {T.shape[1]}"
            )
        if U.shape[1] < 1:
            raise ValueError("rank must be >= 1")
        if min(U.shape[0], S.shape[0], T.shape[0]) < 1:
            raise ValueError("every mode must have at least one entity")
        for name, m in (("U", U), ("S", S), ("T", T)):
            if not np.isfinite(m).all():
                raise ValueError(f"non-finite element in factor matrix {name}")
        self.U, self.S, self.T = U, S, T

    @property
    def dims(self) -> Tuple[int, int, int]:
        return (self.U.shape[0], self.S.shape[0], self.T.shape[0])

    @property
    def rank(self) -> int:
        return self.U.shape[1]

    def copy(self) -> "FactorModel":
        return FactorModel(self.U.copy(), self.S.copy(), self.T.copy())

    def __repr__(self) -> str:
        return f"FactorModel(dims={self.dims}, rank={self.rank})"


def init_model(
    dims: Tuple[int, int, int],
    rank: int,
    seed: int = DEFAULT_INIT_SEED,
    scale: float = DEFAULT_INIT_SCALE,
) -> FactorModel:
    """Deterministically initialised model, elements uniform on (0, scale).

    Identical (dims, rank, seed, scale) always produce the identical model,
    so repeated experiments can share one initialisation.
    """
    I, J, K = dims
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    if min(I, J, K) < 1:
        raise ValueError(f"dims must all be >= 1, got {dims}")
    if not (scale > 0):
        raise ValueError(f"scale must be positive, got {scale}")
    rng = make_rng(seed)
    U = rng.uniform(0.0, scale, size=(I, rank))
    S = rng.uniform(0.0, scale, size=(J, rank))
    T = rng.uniform(0.0, scale, size=(K, rank))
    return FactorModel(U, S, T)


def predict_arrays(m: FactorModel, ii, jj, kk) -> np.ndarray:
    """Reconstructed values for parallel index arrays (vectorised hot path)."""
    ii = np.asarray(ii, dtype=np.int64)
    jj = np.asarray(jj, dtype=np.int64)
    kk = np.asarray(kk, dtype=np.int64)
    I, J, K = m.dims
    for name, arr, bound in (("i", ii, I), ("j", jj, J), ("k", kk, K)):
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) >= bound):
            raise ValueError(f"{name} index out of range [0,{bound})")
    if ii.size == 0:
        return np.empty(0, dtype=np.float64)
    return np.einsum("nr,nr,nr->n", m.U[ii], m.S[jj], m.T[kk])


def predict_entry(m: FactorModel, idx) -> float:
    """yhat_ijk = sum_r u_ir * s_jr * t_kr for one index triple."""
    i, j, k = idx
    return float(predict_arrays(m, [i], [j], [k])[0])


def predict_many(m: FactorModel, idxs: Sequence) -> np.ndarray:
    """Element-wise predict_entry over a sequence of index triples."""
    n = len(idxs)
    ii = np.empty(n, dtype=np.int64)
    jj = np.empty(n, dtype=np.int64)
    kk = np.empty(n, dtype=np.int64)
    for p, idx in enumerate(idxs):
        ii[p], jj[p], kk[p] = idx
    return predict_arrays(m, ii, jj, kk)
