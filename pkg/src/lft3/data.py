"""Tensor text I/O, dataset splitting, synthetic data, and outlier injection.

COO text format (the package's canonical interchange format):

    # optional comments
    dims I J K
    i j k value
    ...

`#` starts a comment, blank lines are ignored, fields are whitespace
separated. Values are written with shortest round-trip precision so that
parse(write(t)) reproduces t exactly.

Model checkpoint format:

    LFT v1 dimI dimJ dimK R
    <dimI rows of R reals>   (U)
    <dimJ rows of R reals>   (S)
    <dimK rows of R reals>   (T)
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple, Union

import numpy as np

from .model import FactorModel
from .rng import make_rng
from .tensor import EntryIndex, SparseTensor

CHECKPOINT_MAGIC = "LFT"
CHECKPOINT_VERSION = "v1"


class ParseError(ValueError):
    """Malformed COO text or checkpoint; message carries the location."""


@dataclass(frozen=True)
class SplitSets:
    """Disjoint train/validation/test partitions of one tensor's entries."""

    train: SparseTensor
    val: SparseTensor
    test: SparseTensor

    @property
    def dims(self):
        return self.train.dims


@dataclass(frozen=True)
class OutlierPlan:
    """Corruption recipe: fraction of entries shifted by magnitude * sigma."""

    fraction: float
    magnitude: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.fraction <= 1.0):
            raise ValueError(f"fraction must be in [0,1], got {self.fraction}")
        if not (self.magnitude > 0):
            raise ValueError(f"magnitude must be positive, got {self.magnitude}")


def _int_near(x: float, tol: float = 1e-9) -> Union[int, None]:
    # Counter the float rounding of N * ratio: 90 * 0.7 is 62.99999999999999.
    nearest = round(x)
    if abs(x - nearest) <= tol * max(1.0, abs(x)):
        return int(nearest)
    return None

def _floor_count(x: float) -> int:
    snapped = _int_near(x)
    return snapped if snapped is not None else math.floor(x)

def _ceil_count(x: float) -> int:
    snapped = _int_near(x)
    return snapped if snapped is not None else math.ceil(x)


def parse_coo_text(text: Union[str, Iterable[str]]) -> SparseTensor:
    """Parse COO text into a validated SparseTensor.

    Raises ParseError naming the line (and token) of the first problem:
    malformed line, out-of-range or duplicate index, or non-finite value.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    dims = None
    ii: List[int] = []
    jj: List[int] = []
    kk: List[int] = []
    vals: List[float] = []
    line_nos: List[int] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if dims is None:
            if tokens[0] != "dims" or len(tokens) != 4:
                raise ParseError(
                    f"line {lineno}: expected header 'dims I J K', got {line!r}"
                )
            try:
                dims = tuple(int(tok) for tok in tokens[1:])
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer dimension in {line!r}") from None
            if min(dims) < 1:
                raise ParseError(f"line {lineno}: dims must all be >= 1, got {dims}")
            continue
        if len(tokens) != 4:
            raise ParseError(
                f"line {lineno}: expected 'i j k value' (4 fields), got {len(tokens)}"
            )
        try:
            i, j, k = int(tokens[0]), int(tokens[1]), int(tokens[2])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer index in {line!r}") from None
        try:
            v = float(tokens[3])
        except ValueError:
            raise ParseError(
                f"line {lineno} column 4: cannot parse value {tokens[3]!r}"
            ) from None
        if not math.isfinite(v):
            raise ParseError(f"line {lineno}: non-finite value {tokens[3]!r}")
        if not (0 <= i < dims[0] and 0 <= j < dims[1] and 0 <= k < dims[2]):
            raise ParseError(
                f"line {lineno}: index ({i},{j},{k}) out of range for dims {dims}"
            )
        ii.append(i)
        jj.append(j)
        kk.append(k)
        vals.append(v)
        line_nos.append(lineno)
    if dims is None:
        raise ParseError("missing 'dims I J K' header line")
    ia = np.asarray(ii, dtype=np.int64)
    ja = np.asarray(jj, dtype=np.int64)
    ka = np.asarray(kk, dtype=np.int64)
    lin = (ia * dims[1] + ja) * dims[2] + ka
    uniq, first, counts = np.unique(lin, return_index=True, return_counts=True)
    if (counts > 1).any():
        dup_lin = uniq[counts > 1][0]
        where = np.flatnonzero(lin == dup_lin)
        p = int(where[1])
        raise ParseError(
            f"line {line_nos[p]}: duplicate index ({ii[p]},{jj[p]},{kk[p]}) "
            f"(first seen at line {line_nos[int(where[0])]})"
        )
    return SparseTensor(dims, ia, ja, ka, np.asarray(vals), validate=False)


def write_coo_text(t: SparseTensor) -> str:
    """Serialize to COO text; values keep full round-trip precision."""
    out = [f"dims {t.dims[0]} {t.dims[1]} {t.dims[2]}"]
    for i, j, k, v in zip(t.ii, t.jj, t.kk, t.values):
        out.append(f"{i} {j} {k} {float(v)!r}")
    return "\n".join(out) + "\n"


def read_coo_file(path) -> SparseTensor:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_coo_text(fh)


def write_coo_file(path, t: SparseTensor) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_coo_text(t))


def split_dataset(
    t: SparseTensor,
    ratios: Tuple[float, float, float],
    seed: int,
) -> SplitSets:
    """Shuffle entries with a seeded generator and cut train/val/test.

    Sizes are floor(N * ratio) for train and val with the remainder to
    test (exactly 7:1:2 when N is divisible by 10). Deterministic in
    (t, ratios, seed); raises if any part would be empty.
    """
    r_train, r_val, r_test = ratios
    if min(r_train, r_val, r_test) <= 0:
        raise ValueError(f"ratios must be positive, got {ratios}")
    if abs((r_train + r_val + r_test) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    n = len(t)
    n_train = _floor_count(n * r_train)
    n_val = _floor_count(n * r_val)
    n_test = n - n_train - n_val
    if min(n_train, n_val, n_test) < 1:
        raise ValueError(
            f"split of {n} entries at {ratios} leaves an empty subset "
            f"(sizes {n_train}/{n_val}/{n_test})"
        )
    perm = make_rng(seed).permutation(n)
    return SplitSets(
        train=t.subset(perm[:n_train]),
        val=t.subset(perm[n_train:n_train + n_val]),
        test=t.subset(perm[n_train + n_val:]),
    )


def generate_synthetic(
    dims: Tuple[int, int, int],
    rank: int,
    density: float,
    noise_sigma: float,
    seed: int,
) -> Tuple[SparseTensor, FactorModel]:
    """Low-rank ground-truth tensor for desk-scale experiments.

    Draws factors uniform(0, 1), picks ceil(density * I * J * K) distinct
    random cells, observes the model value plus Gaussian(0, noise_sigma)
    noise. Returns the observed tensor and the generating model.
    """
    I, J, K = dims
    if min(I, J, K) < 1:
        raise ValueError(f"dims must all be >= 1, got {dims}")
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    if not (0.0 < density <= 1.0):
        raise ValueError(f"density must be in (0,1], got {density}")
    if noise_sigma < 0:
        raise ValueError(f"noise_sigma must be >= 0, got {noise_sigma}")
    total = I * J * K
    if density * total < 1:
        raise ValueError(f"density {density} selects no cells of {total}")
    m = _ceil_count(density * total)
    rng = make_rng(seed)
    truth = FactorModel(
        rng.uniform(0.0, 1.0, (I, rank)),
        rng.uniform(0.0, 1.0, (J, rank)),
        rng.uniform(0.0, 1.0, (K, rank)),
    )
    lin = rng.choice(total, size=m, replace=False)
    kk = lin % K
    jj = (lin // K) % J
    ii = lin // (J * K)
    y = np.einsum("nr,nr,nr->n", truth.U[ii], truth.S[jj], truth.T[kk])
    if noise_sigma > 0:
        y = y + rng.normal(0.0, noise_sigma, size=m)
    tensor = SparseTensor(dims, ii, jj, kk, y, validate=False)
    return tensor, truth


def inject_outliers(
    t: SparseTensor,
    plan: OutlierPlan,
) -> Tuple[SparseTensor, List[EntryIndex]]:
    """Corrupt floor(fraction * N) seeded-random entries.

    Each picked value is shifted by magnitude * sigma with a seeded random
    sign, sigma being the standard deviation of t's values. Returns the
    corrupted tensor plus the exact corrupted indices so callers can
    evaluate on clean entries only.
    """
    n = len(t)
    m = _floor_count(plan.fraction * n)
    if m == 0:
        return t, []
    rng = make_rng(plan.seed)
    positions = np.sort(rng.choice(n, size=m, replace=False))
    sigma = float(np.std(t.values))
    signs = np.where(rng.random(m) < 0.5, 1.0, -1.0)
    values = t.values.copy()
    values[positions] += plan.magnitude * sigma * signs
    corrupted = [
        EntryIndex(int(t.ii[p]), int(t.jj[p]), int(t.kk[p])) for p in positions
    ]
    return t.with_values(values), corrupted


def write_model_text(m: FactorModel) -> str:
    """Checkpoint text, round-trippable at full precision."""
    I, J, K = m.dims
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION} {I} {J} {K} {m.rank}"]
    for mat in (m.U, m.S, m.T):
        for row in mat:
            lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def parse_model_text(text: Union[str, Iterable[str]]) -> FactorModel:
    lines = text.splitlines() if isinstance(text, str) else [l.rstrip("\n") for l in text]
    if not lines:
        raise ParseError("empty checkpoint")
    header = lines[0].split()
    if len(header) != 6 or header[0] != CHECKPOINT_MAGIC or header[1] != CHECKPOINT_VERSION:
        raise ParseError(
            f"line 1: expected '{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION} I J K R', got {lines[0]!r}"
        )
    try:
        I, J, K, R = (int(x) for x in header[2:])
    except ValueError:
        raise ParseError(f"line 1: non-integer shape in {lines[0]!r}") from None
    body = [l for l in lines[1:] if l.strip()]
    if len(body) != I + J + K:
        raise ParseError(
            f"checkpoint body has {len(body)} rows, expected {I}+{J}+{K}"
        )
    def block(rows, count, offset):
        out = np.empty((count, R), dtype=np.float64)
        for q in range(count):
            parts = rows[q].split()
            if len(parts) != R:
                raise ParseError(f"line {offset + q + 2}: expected {R} values, got {len(parts)}")
            out[q] = [float(x) for x in parts]
        return out
    U = block(body[:I], I, 0)
    S = block(body[I:I + J], J, I)
    T = block(body[I + J:], K, I + J)
    return FactorModel(U, S, T)


def read_model_file(path) -> FactorModel:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model_text(fh.read())


def write_model_file(path, m: FactorModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_model_text(m))
