"""Command-line pipeline: split, train, evaluate, compare, impute.

Subcommands
    train    one split/train/test run; writes checkpoint, curve CSV, manifest
    repeat   N runs with stepped split seeds; aggregates mean/std test error
    compare  both losses on identical splits and initialization
    impute   predictions for explicit queries or all missing cells
    grid     small eta/lambda validation grid search

All delimited outputs are deterministic given the echoed seeds; figures
are rendered next to each CSV unless --no-plot is given.
"""

import argparse
import hashlib
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .data import (
    ParseError,
    read_coo_file,
    read_model_file,
    split_dataset,
    write_coo_text,
    write_model_file,
)
from .loss import L2, TDW, LossSpec, compute_tau
from .metrics import mae, rmse
from .model import init_model, predict_arrays
from .tensor import SparseTensor
from .train import MAE, RMSE, DivergenceError, TrainConfig, train

# Manifest keys whose values depend on the clock, excluded from
# byte-for-byte reproducibility comparisons.
NONDETERMINISTIC_MANIFEST_KEYS = (
    "timestamp_utc",
    "wall_time_seconds",
    "time_to_best_rmse_s",
    "time_to_best_mae_s",
)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_tensor(path) -> SparseTensor:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"data file not found: {path}")
    return read_coo_file(p)


def _parse_split(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"--split expects three colon-separated parts, got {text!r}")
    weights = [float(p) for p in parts]
    if min(weights) <= 0:
        raise ValueError(f"--split parts must be positive, got {text!r}")
    total = sum(weights)
    return tuple(w / total for w in weights)


def _write_manifest(path, pairs) -> None:
    lines = [f"{k}={_fmt(v)}" for k, v in pairs]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_pipeline(tensor, data_path, args, loss_kind, split_seed, shuffle_seed):
    """Split, train, test once; returns everything the reports need."""
    ratios = _parse_split(args.split)
    splits = split_dataset(tensor, ratios, split_seed)
    tau = compute_tau(splits.train) if loss_kind == TDW else None
    spec = LossSpec(loss_kind, args.lam, tau)
    model0 = init_model(tensor.dims, args.rank, args.init_seed, args.init_scale)
    cfg = TrainConfig(
        eta=args.eta,
        lam=args.lam,
        max_epochs=args.max_epochs,
        tol=args.tol,
        seed=shuffle_seed,
        shuffle=args.shuffle,
        stop_metric=args.stop_metric,
    )
    model, report = train(model0, splits.train, splits.val, spec, cfg,
                          keep_best=args.keep_best)
    test_rmse = rmse(model, splits.test)
    test_mae = mae(model, splits.test)
    if not (math.isfinite(test_rmse) and math.isfinite(test_mae)):
        raise RuntimeError(f"non-finite test metrics: rmse={test_rmse} mae={test_mae}")
    return {
        "tensor": tensor,
        "splits": splits,
        "spec": spec,
        "cfg": cfg,
        "model": model,
        "report": report,
        "loss": loss_kind,
        "tau": tau,
        "split_seed": split_seed,
        "shuffle_seed": shuffle_seed,
        "ratios": ratios,
        "data_path": str(data_path),
        "test_rmse": test_rmse,
        "test_mae": test_mae,
    }


def _manifest_pairs(command, run, args):
    splits, report = run["splits"], run["report"]
    pairs = [
        ("command", command),
        ("data", run["data_path"]),
        ("data_sha256", _sha256(run["data_path"])),
        ("dim_i", run["tensor"].dims[0]),
        ("dim_j", run["tensor"].dims[1]),
        ("dim_k", run["tensor"].dims[2]),
        ("n_entries", len(run["tensor"])),
        ("split_ratios", ":".join(repr(r) for r in run["ratios"])),
        ("n_train", len(splits.train)),
        ("n_val", len(splits.val)),
        ("n_test", len(splits.test)),
        ("split_seed", run["split_seed"]),
        ("init_seed", args.init_seed),
        ("shuffle_seed", run["shuffle_seed"]),
        ("loss", run["loss"]),
        ("tau", "none" if run["tau"] is None else float(run["tau"])),
        ("rank", args.rank),
        ("init_scale", float(args.init_scale)),
        ("eta", float(args.eta)),
        ("lam", float(args.lam)),
        ("max_epochs", args.max_epochs),
        ("tol", float(args.tol)),
        ("shuffle", args.shuffle),
        ("stop_metric", args.stop_metric),
        ("keep_best", args.keep_best),
        ("epochs_run", report.epochs_run),
        ("stop_reason", report.stop_reason),
        ("best_epoch_rmse", report.best_epoch(RMSE)),
        ("best_epoch_mae", report.best_epoch(MAE)),
        ("test_rmse", run["test_rmse"]),
        ("test_mae", run["test_mae"]),
        ("timestamp_utc", datetime.now(timezone.utc).isoformat()),
        ("wall_time_seconds", report.wall_time_seconds),
        ("time_to_best_rmse_s", report.time_to_best(RMSE)),
        ("time_to_best_mae_s", report.time_to_best(MAE)),
    ]
    return pairs


def _write_curve(path, report, plot: bool) -> None:
    lines = ["epoch,val_rmse,val_mae"]
    for epoch, vr, vm in report.val_trace:
        lines.append(f"{epoch},{vr!r},{vm!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if plot:
        from .plots import save_curve_figure

        save_curve_figure(report.val_trace, Path(path).with_suffix(".png"))


def cmd_train(args) -> int:
    tensor = _load_tensor(args.data)
    run = _run_pipeline(tensor, args.data, args, args.loss, args.split_seed,
                        args.shuffle_seed)
    if args.out_model:
        write_model_file(args.out_model, run["model"])
    if args.out_curve:
        _write_curve(args.out_curve, run["report"], args.plot)
    if args.out_manifest:
        _write_manifest(args.out_manifest, _manifest_pairs("train", run, args))
    print(f"rmse={run['test_rmse']!r} mae={run['test_mae']!r}")
    return 0


def cmd_repeat(args) -> int:
    tensor = _load_tensor(args.data)
    rows = []
    for rep in range(args.repeats):
        split_seed = args.split_seed + rep * args.seed_step
        shuffle_seed = args.shuffle_seed + rep * args.seed_step
        run = _run_pipeline(tensor, args.data, args, args.loss, split_seed,
                            shuffle_seed)
        rows.append((rep, run["test_rmse"], run["test_mae"]))
        if args.out_dir:
            out_dir = Path(args.out_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            _write_manifest(out_dir / f"run_{rep:03d}.manifest",
                            _manifest_pairs("repeat", run, args))
    rmses = [r[1] for r in rows]
    maes = [r[2] for r in rows]

    def _std(vals):
        # identical repeats have exactly zero spread; avoid (3a)/3 != a fuzz
        return 0.0 if len(set(vals)) == 1 else float(np.std(vals))

    lines = ["run,test_rmse,test_mae"]
    for rep, tr, tm in rows:
        lines.append(f"{rep},{tr!r},{tm!r}")
    lines.append(f"mean,{float(np.mean(rmses))!r},{float(np.mean(maes))!r}")
    lines.append(f"std,{_std(rmses)!r},{_std(maes)!r}")
    csv_text = "\n".join(lines) + "\n"
    if args.out_csv:
        Path(args.out_csv).write_text(csv_text, encoding="utf-8")
        if args.plot:
            from .plots import save_repeat_figure

            save_repeat_figure(rmses, maes, Path(args.out_csv).with_suffix(".png"))
    print(csv_text, end="")
    return 0


def cmd_compare(args) -> int:
    tensor = _load_tensor(args.data)
    kinds = [k.strip() for k in args.losses.split(",") if k.strip()]
    if len(kinds) != 2 or any(k not in (L2, TDW) for k in kinds):
        raise ValueError(f"--losses expects two of {{{L2},{TDW}}}, got {args.losses!r}")
    rows = []
    for kind in kinds:
        run = _run_pipeline(tensor, args.data, args, kind, args.split_seed,
                            args.shuffle_seed)
        report = run["report"]
        rows.append({
            "loss": kind,
            "test_rmse": run["test_rmse"],
            "test_mae": run["test_mae"],
            "time_rmse_s": report.time_to_best(RMSE),
            "time_mae_s": report.time_to_best(MAE),
        })
    lines = ["loss,test_rmse,test_mae,time_rmse_s,time_mae_s"]
    for r in rows:
        lines.append(
            f"{r['loss']},{r['test_rmse']!r},{r['test_mae']!r},"
            f"{r['time_rmse_s']!r},{r['time_mae_s']!r}"
        )
    csv_text = "\n".join(lines) + "\n"
    if args.out_csv:
        Path(args.out_csv).write_text(csv_text, encoding="utf-8")
        if args.plot:
            from .plots import save_compare_figure

            save_compare_figure(rows, Path(args.out_csv).with_suffix(".png"))
    print(csv_text, end="")
    return 0


def _read_queries(path):
    queries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError(f"line {lineno}: query needs 'i j k', got {line!r}")
            try:
                queries.append(tuple(int(p) for p in parts))
            except ValueError:
                raise ParseError(f"line {lineno}: non-integer query index {line!r}") from None
    return queries


def _missing_indices(tensor: SparseTensor) -> np.ndarray:
    I, J, K = tensor.dims
    total = I * J * K
    known = tensor.linear_indices()
    missing = np.setdiff1d(np.arange(total, dtype=np.int64), known, assume_unique=False)
    return missing


def cmd_impute(args) -> int:
    model = read_model_file(args.model)
    I, J, K = model.dims
    if args.all_missing:
        if not args.data:
            raise ValueError("--all-missing requires --data to identify known entries")
        tensor = _load_tensor(args.data)
        if tensor.dims != model.dims:
            raise ValueError(
                f"data dims {tensor.dims} do not match checkpoint dims {model.dims}"
            )
        lin = _missing_indices(tensor)
        kk = lin % K
        jj = (lin // K) % J
        ii = lin // (J * K)
    else:
        if not args.queries:
            raise ValueError("either --queries FILE or --all-missing is required")
        queries = _read_queries(args.queries)
        ii = np.array([q[0] for q in queries], dtype=np.int64)
        jj = np.array([q[1] for q in queries], dtype=np.int64)
        kk = np.array([q[2] for q in queries], dtype=np.int64)
        for q in queries:
            if not (0 <= q[0] < I and 0 <= q[1] < J and 0 <= q[2] < K):
                raise ValueError(f"query index {q} out of range for dims {model.dims}")
    preds = predict_arrays(model, ii, jj, kk)
    out = SparseTensor(model.dims, ii, jj, kk, preds, validate=False)
    text = write_coo_text(out)
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def cmd_grid(args) -> int:
    tensor = _load_tensor(args.data)
    etas = [float(x) for x in args.etas.split(",") if x]
    lams = [float(x) for x in args.lambdas.split(",") if x]
    if not etas or not lams:
        raise ValueError("--etas and --lambdas must each list at least one value")
    ratios = _parse_split(args.split)
    splits = split_dataset(tensor, ratios, args.split_seed)
    tau = compute_tau(splits.train) if args.loss == TDW else None
    model0 = init_model(tensor.dims, args.rank, args.init_seed, args.init_scale)
    lines = ["eta,lam,val_rmse,val_mae,epochs"]
    best = None
    for eta in etas:
        for lam in lams:
            spec = LossSpec(args.loss, lam, tau)
            cfg = TrainConfig(eta=eta, lam=lam, max_epochs=args.max_epochs,
                              tol=args.tol, seed=args.shuffle_seed,
                              shuffle=args.shuffle, stop_metric=args.stop_metric)
            try:
                model, report = train(model0, splits.train, splits.val, spec, cfg)
            except DivergenceError:
                lines.append(f"{eta!r},{lam!r},diverged,diverged,0")
                continue
            vr = rmse(model, splits.val)
            vm = mae(model, splits.val)
            lines.append(f"{eta!r},{lam!r},{vr!r},{vm!r},{report.epochs_run}")
            score = vr if args.stop_metric == RMSE else vm
            if best is None or score < best[0]:
                best = (score, eta, lam)
    csv_text = "\n".join(lines) + "\n"
    if args.out_csv:
        Path(args.out_csv).write_text(csv_text, encoding="utf-8")
    print(csv_text, end="")
    if best is not None:
        print(f"best: eta={best[1]!r} lam={best[2]!r} val_{args.stop_metric}={best[0]!r}")
    return 0


def _add_common_train_flags(p: argparse.ArgumentParser, with_loss: bool = True) -> None:
    p.add_argument("data", help="COO text file of observed entries")
    if with_loss:
        p.add_argument("--loss", choices=[L2, TDW], default=TDW)
    p.add_argument("--rank", type=int, default=20, help="latent dimension R")
    p.add_argument("--eta", type=float, default=0.002, help="learning rate")
    p.add_argument("--lambda", dest="lam", type=float, default=0.01,
                   help="Tikhonov coefficient")
    p.add_argument("--seed", type=int, default=0,
                   help="master seed; per-purpose seeds default to it")
    p.add_argument("--split-seed", type=int, default=None)
    p.add_argument("--init-seed", type=int, default=None)
    p.add_argument("--shuffle-seed", type=int, default=None)
    p.add_argument("--split", default="7:1:2", help="train:val:test weights")
    p.add_argument("--max-epochs", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-5,
                   help="stop when validation-error reduction falls below this")
    p.add_argument("--init-scale", type=float, default=0.05,
                   help="factors start uniform on (0, scale)")
    p.add_argument("--stop-metric", choices=[RMSE, MAE], default=RMSE)
    p.add_argument("--shuffle", action=argparse.BooleanOptionalAction, default=True,
                   help="reshuffle entry visit order every epoch")
    p.add_argument("--keep-best", action="store_true",
                   help="return the best-validation snapshot instead of the final epoch")
    p.add_argument("--plot", action=argparse.BooleanOptionalAction, default=True,
                   help="render a figure next to each CSV output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lft3",
        description="Sparse third-order tensor completion by latent factorization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="single split/train/test run")
    _add_common_train_flags(p_train)
    p_train.add_argument("--out-model", default=None, help="checkpoint path")
    p_train.add_argument("--out-curve", default=None, help="per-epoch validation CSV")
    p_train.add_argument("--out-manifest", default=None, help="key=value run record")
    p_train.set_defaults(func=cmd_train)

    p_rep = sub.add_parser("repeat", help="repeated runs with stepped split seeds")
    _add_common_train_flags(p_rep)
    p_rep.add_argument("--repeats", type=int, default=20)
    p_rep.add_argument("--seed-step", type=int, default=1,
                       help="seed increment per repetition (0 repeats one seed)")
    p_rep.add_argument("--out-csv", default=None)
    p_rep.add_argument("--out-dir", default=None, help="directory for per-run manifests")
    p_rep.set_defaults(func=cmd_repeat)

    p_cmp = sub.add_parser("compare", help="train both losses on identical setup")
    _add_common_train_flags(p_cmp, with_loss=False)
    p_cmp.add_argument("--losses", default=f"{L2},{TDW}",
                       help="comma pair of losses to put in the two rows")
    p_cmp.add_argument("--out-csv", default=None)
    p_cmp.set_defaults(func=cmd_compare)

    p_imp = sub.add_parser("impute", help="predict queried or all missing cells")
    p_imp.add_argument("--model", required=True, help="checkpoint path")
    p_imp.add_argument("--queries", default=None, help="file of 'i j k' lines")
    p_imp.add_argument("--all-missing", action="store_true")
    p_imp.add_argument("--data", default=None,
                       help="COO file naming the known entries (for --all-missing)")
    p_imp.add_argument("--out", default="-", help="output path or - for stdout")
    p_imp.set_defaults(func=cmd_impute)

    p_grid = sub.add_parser("grid", help="eta/lambda grid search on validation error")
    _add_common_train_flags(p_grid)
    p_grid.add_argument("--etas", default="0.0001,0.0005,0.001,0.002,0.005,0.01")
    p_grid.add_argument("--lambdas", default="0.001,0.01,0.1")
    p_grid.add_argument("--out-csv", default=None)
    p_grid.set_defaults(func=cmd_grid)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("split_seed", "init_seed", "shuffle_seed"):
        if getattr(args, name, None) is None and hasattr(args, "seed"):
            setattr(args, name, args.seed)
    try:
        return args.func(args)
    except (ValueError, OSError, DivergenceError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
