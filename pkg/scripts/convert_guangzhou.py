#!/usr/bin/env python3
"""Convert the public Guangzhou traffic-speed tensor (tensor.mat) to COO text.

The released MAT file holds a dense 214 x 61 x 144 array (sensor, day,
interval) under the variable name 'tensor'. This writer reorders axes to
the package convention (sensor, interval, day) = 214 x 144 x 61 and drops
zero cells: the release encodes missing readings as 0, so zeros are
treated as unobserved. The resulting file has 1,855,589 entries.

Needs scipy for MAT loading:

    python scripts/convert_guangzhou.py tensor.mat d1_guangzhou.coo
"""

import argparse
import sys

import numpy as np


def convert(mat_path, out_path, var="tensor"):
    from scipy.io import loadmat

    data = loadmat(mat_path)
    if var not in data:
        candidates = [k for k in data if not k.startswith("__")]
        raise SystemExit(f"variable {var!r} not in {mat_path}; found {candidates}")
    dense = np.asarray(data[var], dtype=np.float64)
    if dense.ndim != 3:
        raise SystemExit(f"expected a third-order array, got shape {dense.shape}")
    # (sensor, day, interval) -> (sensor, interval, day)
    dense = np.transpose(dense, (0, 2, 1))
    I, J, K = dense.shape
    ii, jj, kk = np.nonzero(dense)
    vals = dense[ii, jj, kk]
    finite = np.isfinite(vals)
    ii, jj, kk, vals = ii[finite], jj[finite], kk[finite], vals[finite]
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(f"# Guangzhou speed tensor, zeros dropped as missing\n")
        fh.write(f"dims {I} {J} {K}\n")
        for i, j, k, v in zip(ii, jj, kk, vals):
            fh.write(f"{i} {j} {k} {float(v)!r}\n")
    print(f"wrote {len(vals)} entries to {out_path} with dims {I} {J} {K}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("mat", help="path to tensor.mat")
    p.add_argument("out", help="output COO text path")
    p.add_argument("--var", default="tensor", help="MAT variable name")
    args = p.parse_args()
    convert(args.mat, args.out, args.var)


if __name__ == "__main__":
    sys.exit(main())
