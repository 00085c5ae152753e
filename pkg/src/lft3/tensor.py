"""Partially observed third-order tensor stored as a coordinate list.

The tensor axes are (sensor, interval, day). Only observed entries are
stored, in insertion order; the missing set is implicit as every index
triple not present. Nothing here ever materialises a dense array.
"""

from typing import Iterable, Iterator, NamedTuple, Sequence, Tuple

import numpy as np


class EntryIndex(NamedTuple):
    i: int  # sensor
    j: int  # interval
    k: int  # day


class SparseTensor:
    """Immutable bag of (i, j, k, value) observations with fixed dims.

    Index arrays and values are held as read-only numpy arrays in insertion
    order, which is also the iteration order. Use :func:`build_tensor` to
    construct from (index, value) pairs with full validation.
    """

    __slots__ = ("dims", "ii", "jj", "kk", "values")

    def __init__(self, dims, ii, jj, kk, values, validate: bool = True):
        dims = (int(dims[0]), int(dims[1]), int(dims[2]))
        ii = np.ascontiguousarray(ii, dtype=np.int64)
        jj = np.ascontiguousarray(jj, dtype=np.int64)
        kk = np.ascontiguousarray(kk, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if not (ii.shape == jj.shape == kk.shape == values.shape) or ii.ndim != 1:
            raise ValueError("index and value arrays must be 1-D and equal length")
        if validate:
            _validate_entries(dims, ii, jj, kk, values)
        for a in (ii, jj, kk, values):
            a.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "ii", ii)
        object.__setattr__(self, "jj", jj)
        object.__setattr__(self, "kk", kk)
        object.__setattr__(self, "values", values)

    def __setattr__(self, name, value):
        raise AttributeError("SparseTensor is immutable")

    def __len__(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_entries(self) -> int:
        return len(self)

    def entries(self) -> Iterator[Tuple[EntryIndex, float]]:
        """Yield (EntryIndex, value) pairs in insertion order."""
        for i, j, k, v in zip(self.ii, self.jj, self.kk, self.values):
            yield EntryIndex(int(i), int(j), int(k)), float(v)

    def linear_indices(self) -> np.ndarray:
        """Entry positions flattened as (i * dimJ + j) * dimK + k."""
        _, J, K = self.dims
        return (self.ii * J + self.jj) * K + self.kk

    def subset(self, positions: np.ndarray) -> "SparseTensor":
        """New tensor holding the entries at the given positions, same dims."""
        return SparseTensor(
            self.dims,
            self.ii[positions],
            self.jj[positions],
            self.kk[positions],
            self.values[positions],
            validate=False,
        )

    def with_values(self, values: np.ndarray) -> "SparseTensor":
        """Same indices and dims, replaced values (must be finite)."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.values.shape:
            raise ValueError("replacement values must match entry count")
        if not np.isfinite(values).all():
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValueError(f"non-finite value at entry position {bad}")
        return SparseTensor(self.dims, self.ii, self.jj, self.kk, values, validate=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseTensor):
            return NotImplemented
        return (
            self.dims == other.dims
            and np.array_equal(self.ii, other.ii)
            and np.array_equal(self.jj, other.jj)
            and np.array_equal(self.kk, other.kk)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"SparseTensor(dims={self.dims}, n_entries={len(self)})"


def _validate_entries(dims, ii, jj, kk, values):
    I, J, K = dims
    if I < 1 or J < 1 or K < 1:
        raise ValueError(f"dims must all be >= 1, got {dims}")
    for name, arr, bound in (("i", ii, I), ("j", jj, J), ("k", kk, K)):
        bad = (arr < 0) | (arr >= bound)
        if bad.any():
            p = int(np.flatnonzero(bad)[0])
            raise ValueError(
                f"index out of range: ({int(ii[p])},{int(jj[p])},{int(kk[p])}) "
                f"has {name}={int(arr[p])} outside [0,{bound})"
            )
    finite = np.isfinite(values)
    if not finite.all():
        p = int(np.flatnonzero(~finite)[0])
        raise ValueError(
            f"non-finite value {values[p]!r} at index ({int(ii[p])},{int(jj[p])},{int(kk[p])})"
        )
    lin = (ii * J + jj) * K + kk
    uniq, counts = np.unique(lin, return_counts=True)
    if (counts > 1).any():
        dup = uniq[counts > 1][0]
        k = int(dup % K)
        j = int((dup // K) % J)
        i = int(dup // (J * K))
        raise ValueError(f"duplicate entry index ({i},{j},{k})")


def build_tensor(
    dims: Tuple[int, int, int],
    entries: Sequence[Tuple[Tuple[int, int, int], float]],
) -> SparseTensor:
    """Validated SparseTensor from a sequence of ((i, j, k), value) pairs.

    Rejects out-of-range or duplicate indices and non-finite values, naming
    the offending index. Iteration order of the result is insertion order.
    """
    n = len(entries)
    ii = np.empty(n, dtype=np.int64)
    jj = np.empty(n, dtype=np.int64)
    kk = np.empty(n, dtype=np.int64)
    values = np.empty(n, dtype=np.float64)
    for p, (idx, v) in enumerate(entries):
        i, j, k = idx
        ii[p], jj[p], kk[p] = int(i), int(j), int(k)
        values[p] = float(v)
    return SparseTensor(dims, ii, jj, kk, values, validate=True)


def density(t: SparseTensor) -> float:
    """Observed fraction: entry count over dimI * dimJ * dimK."""
    I, J, K = t.dims
    return len(t) / (I * J * K)


def median_value(values: Iterable[float]) -> float:
    """Median of a nonempty sequence.

    Odd count: the middle order statistic. Even count: the arithmetic mean
    of the two middle order statistics.
    """
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                     dtype=np.float64)
    if arr.size == 0:
        raise ValueError("median of an empty sequence")
    return float(np.median(arr))
