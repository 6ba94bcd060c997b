"""Command-line pipelines: scene generation, measurement campaigns, twin training
(centralized and federated), baseline fitting, maps, association, and evaluation.

Every run writes outputs atomically (write-then-rename) and drops a manifest with
the full flag set next to them, so any output directory can be reproduced.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .assoc import associate_by_distance, associate_by_gain
from .env import generate_environment, load_environment, save_environment
from .fedtwin import FlConfig, run_fl
from .interp import IdwInterpolator, KrigingInterpolator
from .maps import build_gain_map, build_si_map, save_map_csv, save_map_pgm
from .metrics import box_stats, error_metrics, save_box_stats
from .mlp import MlpGainRegressor, load_checkpoint, save_checkpoint
from .plfit import LogDistancePathLoss, load_pl_model, save_pl_model
from .propagation import ChannelOracle, PropagationParams
from .sampling import Dataset, build_dataset, load_dataset, save_dataset, split_dataset
from .validation import fmt_float

FL_METRICS_HEADER = "round,val_mse_db2"
TRAIN_METRICS_HEADER = "epoch,train_mse_db2,val_mse_db2"
ERRORS_HEADER = "tx_x,tx_y,rx_x,rx_y,abs_err_db"


@contextlib.contextmanager
def atomic_output(path: str):
    """Yield a temp path in the target directory; rename over `path` on success."""
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp.", suffix=".part")
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _out_dir(args) -> str:
    return args.out_dir or os.environ.get("CT_OUT_DIR") or "."

def _resolve(args, path: str) -> str:
    if os.path.isabs(path):
        return path
    base = _out_dir(args)
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, path)


def _write_manifest(args, command: str) -> None:
    flags = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {"tool": "chantwin", "version": __version__,
                "command": command, "args": flags}
    path = _resolve(args, f"{command}.manifest.json")
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _parse_pair(text: str, sep: str, what: str) -> tuple[float, float]:
    parts = text.split(sep)
    if len(parts) != 2:
        raise ValueError(f"{what} must be two numbers separated by {sep!r}, got {text!r}")
    return float(parts[0]), float(parts[1])


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out-dir", default=None,
                        help="directory for outputs (default: $CT_OUT_DIR or .)")
    parser.add_argument("--strict", action="store_true",
                        help="bit-stable numerics mode (all pipelines run as a single "
                             "deterministic sequence; the flag pins that contract)")


def _add_prop_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pl0", type=float, default=40.0, help="path loss at 1 m (dB)")
    parser.add_argument("--exp", type=float, default=3.0, help="path-loss exponent")
    parser.add_argument("--shadow-sigma", type=float, default=4.0,
                        help="shadowing std dev (dB), 0 disables")
    parser.add_argument("--shadow-corr-len", type=float, default=25.0,
                        help="shadowing correlation length (m)")
    parser.add_argument("--d-min", type=float, default=1.0, help="distance floor (m)")
    parser.add_argument("--prop-seed", type=int, default=0, help="shadowing field seed")


def _prop_params(args) -> PropagationParams:
    return PropagationParams(pl0_db=args.pl0, exponent=args.exp,
                             shadowing_sigma_db=args.shadow_sigma,
                             shadowing_corr_len=args.shadow_corr_len,
                             d_min=args.d_min, seed=args.prop_seed)


def _roi_bounds(env) -> tuple[list, list]:
    return [0.0, 0.0, 0.0, 0.0], [env.roi_width, env.roi_height,
                                  env.roi_width, env.roi_height]


def _load_predictor(args, model: str):
    """Resolve a --model reference: 'oracle', 'idw', 'kriging', an .ckpt path, or a
    fitted path-loss file."""
    if model == "oracle":
        env = load_environment(args.env)
        return ChannelOracle(env, _prop_params(args))
    if model in ("idw", "kriging"):
        if not getattr(args, "data", None):
            raise ValueError(f"--model {model} needs --data with fitted samples")
        ds = load_dataset(args.data)
        est = IdwInterpolator() if model == "idw" else KrigingInterpolator()
        return est.fit(ds.coords, ds.gains)
    if not os.path.exists(model):
        raise FileNotFoundError(f"model file not found: {model}")
    if model.endswith(".ckpt"):
        return load_checkpoint(model)
    return load_pl_model(model)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen_env(args) -> int:
    w, h = _parse_pair(args.roi, "x", "--roi")
    env = generate_environment(args.seed, args.obstacles, args.aps, w, h,
                               wall_loss_db=args.wall_loss)
    out = _resolve(args, args.out)
    with atomic_output(out) as tmp:
        save_environment(env, tmp)
    _write_manifest(args, "gen-env")
    print(f"wrote {out}: {len(env.obstacles)} obstacles, {len(env.aps)} APs")
    return 0


def cmd_gen_data(args) -> int:
    env = load_environment(args.env)
    params = _prop_params(args)
    ds = build_dataset(env, params, args.n, args.seed,
                       spacing=args.spacing, noise_sigma_db=args.noise)
    out = _resolve(args, args.out)
    with atomic_output(out) as tmp:
        save_dataset(ds, tmp)
    written = [out]
    if args.split:
        fracs = tuple(float(f) for f in args.split.split(","))
        parts = split_dataset(ds, fracs, args.seed)
        stem, ext = os.path.splitext(out)
        for part in parts:
            path = f"{stem}-{part.split_tag}{ext}"
            with atomic_output(path) as tmp:
                save_dataset(part, tmp)
            written.append(path)
    _write_manifest(args, "gen-data")
    print(f"wrote {', '.join(written)} ({len(ds)} samples)")
    return 0


def _write_metrics_csv(path: str, header: str, rows) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")


def cmd_train(args) -> int:
    ds = load_dataset(args.data)
    val = load_dataset(args.val, "val") if args.val else None
    bounds = _roi_bounds(load_environment(args.env)) if args.env else None
    model = MlpGainRegressor(hidden_width=args.width, lr=args.lr,
                             batch_size=args.batch, epochs=args.epochs,
                             optimizer=args.optimizer, seed=args.seed,
                             input_bounds=bounds)
    model.fit(ds.coords, ds.gains,
              X_val=val.coords if val else None,
              y_val=val.gains if val else None)
    out = _resolve(args, args.out)
    with atomic_output(out) as tmp:
        save_checkpoint(model, tmp)
    if args.metrics:
        rows = [(str(r["epoch"]), fmt_float(r["train_mse_db2"]),
                 fmt_float(r.get("val_mse_db2", float("nan"))))
                for r in model.history_]
        _write_metrics_csv(_resolve(args, args.metrics), TRAIN_METRICS_HEADER, rows)
    _write_manifest(args, "train")
    last = model.history_[-1]
    print(f"wrote {out}: final train MSE {last['train_mse_db2']:.3f} dB^2"
          + (f", val MSE {last['val_mse_db2']:.3f} dB^2" if "val_mse_db2" in last else ""))
    return 0


def cmd_train_fl(args) -> int:
    ds = load_dataset(args.data)
    val = load_dataset(args.val, "val")
    bounds = _roi_bounds(load_environment(args.env)) if args.env else None
    cfg = FlConfig(n_clients=args.clients, rounds=args.rounds,
                   local_epochs=args.local_epochs, batch_size=args.batch,
                   lr=args.lr, seed=args.seed, participation=args.participation,
                   optimizer=args.optimizer, hidden_width=args.width)
    model, history = run_fl(ds, val, cfg, input_bounds=bounds)
    out = _resolve(args, args.out)
    with atomic_output(out) as tmp:
        save_checkpoint(model, tmp)
    if args.metrics:
        rows = [(str(r["round"]), fmt_float(r["val_mse_db2"])) for r in history]
        _write_metrics_csv(_resolve(args, args.metrics), FL_METRICS_HEADER, rows)
    _write_manifest(args, "train-fl")
    print(f"wrote {out}: final val MSE {history[-1]['val_mse_db2']:.3f} dB^2 "
          f"after {cfg.rounds} rounds x {cfg.n_clients} clients")
    return 0


def cmd_fit_pl(args) -> int:
    ds = load_dataset(args.data)
    model = LogDistancePathLoss(d_min=args.d_min).fit(ds.coords, ds.gains)
    out = _resolve(args, args.out)
    with atomic_output(out) as tmp:
        save_pl_model(model, tmp)
    _write_manifest(args, "fit-pl")
    print(f"wrote {out}: a={model.a_db_:.4f} dB, b={model.b_db_per_decade_:.4f} dB/decade")
    return 0


def cmd_map(args) -> int:
    env = load_environment(args.env)
    predictor = _load_predictor(args, args.model)
    tx = _parse_pair(args.tx, ",", "--tx")
    if args.si_seeds:
        gmap = build_si_map(env, predictor, tx, args.si_seeds, args.seed,
                            method=args.method, resolution=args.res)
    else:
        tag = args.model if args.model in ("oracle", "idw", "kriging") else \
            ("mlp" if args.model.endswith(".ckpt") else "pl")
        gmap = build_gain_map(env, predictor, tx, resolution=args.res, backend_tag=tag)
    out = _resolve(args, args.out)
    with atomic_output(out) as tmp:
        save_map_csv(gmap, tmp)
    if args.pgm:
        with atomic_output(_resolve(args, args.pgm)) as tmp:
            save_map_pgm(gmap, tmp)
    _write_manifest(args, "map")
    print(f"wrote {out}: {gmap.width}x{gmap.height} cells, backend {gmap.backend_tag}")
    return 0


def cmd_associate(args) -> int:
    env = load_environment(args.env)
    ue = _parse_pair(args.ue, ",", "--ue")
    if args.criterion == "distance":
        result = associate_by_distance(env, ue, args.k)
    else:
        predictor = _load_predictor(args, args.model)
        result = associate_by_gain(env, predictor, ue, args.k)
    lines = ["rank,ap_index,score_db"]
    for rank, (idx, score) in enumerate(result.selected, start=1):
        lines.append(f"{rank},{idx},{fmt_float(score)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        out = _resolve(args, args.out)
        with atomic_output(out) as tmp:
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        _write_manifest(args, "associate")
    sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    ds = load_dataset(args.data, "test")
    predictor = _load_predictor(args, args.model)
    pred = np.asarray(predictor.predict(ds.coords), dtype=float)
    abs_err = np.abs(pred - ds.gains)
    mae, mse = error_metrics(pred, ds.gains)
    out = _resolve(args, args.out)
    with atomic_output(out) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(ERRORS_HEADER + "\n")
            for row, e in zip(ds.coords, abs_err):
                fh.write(",".join(fmt_float(v) for v in row) + "," + fmt_float(e) + "\n")
    if args.box:
        stats = box_stats(abs_err)
        with atomic_output(_resolve(args, args.box)) as tmp:
            save_box_stats(stats, tmp)
    _write_manifest(args, "eval")
    print(f"n={len(ds)} mae_db={fmt_float(mae)} mse_db2={fmt_float(mse)}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chantwin",
        description="Channel-gain twinning workbench: synthetic scenes, measurement "
                    "campaigns, learned/interpolated twins, and twin-aware association.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-env", help="generate a synthetic scene")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--obstacles", type=int, default=12)
    p.add_argument("--aps", type=int, default=20)
    p.add_argument("--roi", default="200x200", help="WxH in metres")
    p.add_argument("--wall-loss", type=float, default=20.0)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_gen_env)

    p = sub.add_parser("gen-data", help="sample an oracle-labeled measurement dataset")
    p.add_argument("--env", required=True)
    p.add_argument("--spacing", type=float, default=8.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0,
                   help="measurement noise std dev (dB)")
    p.add_argument("--split", default=None,
                   help="train,val,test fractions, e.g. 0.8,0.1,0.1; writes "
                        "<out>-train/-val/-test CSVs as well")
    p.add_argument("--out", required=True)
    _add_prop_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train the centralized MLP twin")
    p.add_argument("--data", required=True)
    p.add_argument("--val", default=None)
    p.add_argument("--env", default=None, help="scene file for input normalization bounds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", default=None, help="per-epoch metrics CSV")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("train-fl", help="train the twin with federated averaging")
    p.add_argument("--data", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--env", default=None, help="scene file for input normalization bounds")
    p.add_argument("--clients", type=int, default=3)
    p.add_argument("--rounds", type=int, default=100)
    p.add_argument("--local-epochs", type=int, default=1)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default="adam")
    p.add_argument("--participation", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", default=None, help="per-round metrics CSV")
    _add_common(p)
    p.set_defaults(func=cmd_train_fl)

    p = sub.add_parser("fit-pl", help="fit the log-distance path-loss baseline")
    p.add_argument("--data", required=True)
    p.add_argument("--d-min", type=float, default=1.0)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_fit_pl)

    p = sub.add_parser("map", help="rasterize a gain map for one transmitter")
    p.add_argument("--env", required=True)
    p.add_argument("--model", required=True,
                   help="oracle | idw | kriging | model.ckpt | pl.txt")
    p.add_argument("--tx", required=True, help="transmitter position x,y")
    p.add_argument("--res", type=float, default=2.0)
    p.add_argument("--si-seeds", type=int, default=0,
                   help="if > 0, sample this many receiver positions and interpolate")
    p.add_argument("--method", choices=("idw", "kriging"), default="kriging")
    p.add_argument("--seed", type=int, default=0, help="seed for --si-seeds sampling")
    p.add_argument("--data", default=None, help="samples CSV for idw/kriging models")
    p.add_argument("--out", required=True)
    p.add_argument("--pgm", default=None, help="also write a 16-bit PGM preview")
    _add_prop_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("associate", help="rank APs for a UE position")
    p.add_argument("--env", required=True)
    p.add_argument("--model", default="oracle",
                   help="oracle | idw | kriging | model.ckpt | pl.txt")
    p.add_argument("--ue", required=True, help="UE position x,y")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--criterion", choices=("gain", "distance"), default="gain")
    p.add_argument("--data", default=None, help="samples CSV for idw/kriging models")
    p.add_argument("--out", default=None, help="also write the selection CSV here")
    _add_prop_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_associate)

    p = sub.add_parser("eval", help="score a model against a labeled dataset")
    p.add_argument("--model", required=True,
                   help="oracle | idw | kriging | model.ckpt | pl.txt")
    p.add_argument("--data", required=True)
    p.add_argument("--env", default=None, help="scene file (required for --model oracle)")
    p.add_argument("--out", required=True, help="per-sample absolute-error CSV")
    p.add_argument("--box", default=None, help="also write boxplot stats CSV")
    _add_prop_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # single-line diagnostic, non-zero exit
        print(f"chantwin {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
