"""Command-line front end.

Subcommands:
    complexity  score a manifest of images and emit a metrics CSV
    calibrate   estimate the pivot from a complexity CSV
    select      run one selection round over a manifest
    train       train the toy inpainter with a chosen selection method
    eval        PSNR/SSIM between a prediction and a truth directory
    analyze     loss-versus-complexity correlation study
    sweep       candidate-pool ratio sweep

Every run resolves its configuration (defaults < config file < flags),
writes it to <out>/resolved_config.txt, and emits deterministic reports:
rerunning with the same seed and config reproduces outputs byte for byte.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import harness
from .calibration import estimate_pivot
from .complexity import score_profiles, validate_weights
from .imaging import (ImageTensor, MaskGrid, irregular_mask, load_image,
                      load_report, read_manifest, regular_mask, save_report)
from .quality import psnr, ssim
from .selection import SelectorConfig, run_selection_round

SEED_ENV = "BATCHLENS_SEED"

DEFAULTS = {
    "method": "proposed",
    "iters": 500,
    "b": 8,
    "ratio": 2.0,
    "delta": 0.01,
    "beta": 1.0,
    "weights": "0,0,1",
    "seed": None,  # resolved from BATCHLENS_SEED, else 0
    "lr": 0.01,
    "size": 16,
    "n_train": 256,
    "n_test": 64,
    "mask": "regular",
    "mask_ratio": 0.25,
    "test_every": 20,
    "norm_scope": "batch",
    "jobs": 1,
    "manifest": "",
    "test_manifest": "",
    "loss_csv": "",
    "calibration": "",
    "pivot": "",
    "resize": "",
    "column": "combined",
    "eps": 0.05,
    "min_pts": "",
    "ratios": "1,1.5,2,3",
    "pred_dir": "",
    "truth_dir": "",
    "out": "runs",
}

_INT_KEYS = {"iters", "b", "seed", "size", "n_train", "n_test", "test_every", "jobs"}
_FLOAT_KEYS = {"ratio", "delta", "beta", "lr", "mask_ratio", "eps"}


class UserError(ValueError):
    """Bad input from the caller: flags, files, or config values."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UserError(message)


def _parse_weights(text):
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise UserError(f"--weights needs three comma-separated values, got {text!r}")
    try:
        weights = tuple(float(p) for p in parts)
    except ValueError:
        raise UserError(f"--weights values must be numbers, got {text!r}")
    try:
        return validate_weights(weights)
    except ValueError as exc:
        raise UserError(str(exc))


def load_config_file(path) -> dict:
    """Parse a key=value config file, rejecting unknown keys."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UserError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UserError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in DEFAULTS:
            raise UserError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags; typed and validated."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    if merged["seed"] in (None, ""):
        merged["seed"] = os.environ.get(SEED_ENV, "0")
    typed = {}
    for key, value in merged.items():
        try:
            if key in _INT_KEYS:
                typed[key] = int(value)
            elif key in _FLOAT_KEYS:
                typed[key] = float(value)
            else:
                typed[key] = str(value)
        except ValueError:
            raise UserError(f"config value for {key!r} is not a number: {value!r}")
    _parse_weights(typed["weights"])
    if typed["mask"] not in ("regular", "irregular"):
        raise UserError(f"mask mode must be regular or irregular, got {typed['mask']!r}")
    return typed


def write_resolved(config: dict, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={config[key]}" for key in sorted(config)]
    (out_dir / "resolved_config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def selector_config(config: dict) -> SelectorConfig:
    return SelectorConfig(b=config["b"], big_batch_ratio=config["ratio"],
                          delta=config["delta"], beta=config["beta"],
                          weights=_parse_weights(config["weights"]),
                          seed=config["seed"])


def _mask_for(image: ImageTensor, config: dict, index: int) -> MaskGrid:
    if config["mask"] == "regular":
        return regular_mask(image.height, image.width)
    child = int(np.random.default_rng([config["seed"], index]).integers(0, 2 ** 31))
    return irregular_mask(image.height, image.width, config["mask_ratio"], child)


def _load_manifest_images(config: dict):
    if not config["manifest"]:
        raise UserError("this command needs --manifest")
    paths = read_manifest(config["manifest"])
    if not paths:
        raise UserError(f"manifest {config['manifest']} lists no files")
    resize = int(config["resize"]) if config["resize"] else None
    images = [load_image(p, size=resize) for p in paths]
    masks = [_mask_for(img, config, i) for i, img in enumerate(images)]
    return paths, images, masks


def cmd_complexity(config: dict, out_dir: Path) -> int:
    paths, images, masks = _load_manifest_images(config)
    weights = _parse_weights(config["weights"])
    profiles = score_profiles(images, masks, weights=weights, jobs=config["jobs"])
    rows = [{
        "path": path,
        "si_raw": p.si_raw, "eg_raw": p.eg_raw, "tv_raw": p.tv_raw,
        "si_norm": p.si_norm, "eg_norm": p.eg_norm, "tv_norm": p.tv_norm,
        "combined": p.combined,
    } for path, p in zip(paths, profiles)]
    save_report(rows, out_dir / "complexity.csv")
    print(f"wrote {out_dir / 'complexity.csv'} ({len(rows)} rows)")
    return 0


def cmd_calibrate(config: dict, out_dir: Path) -> int:
    source = config["loss_csv"] or config["manifest"]
    if not source:
        raise UserError("calibrate needs --loss-csv pointing at a complexity CSV")
    rows = load_report(source)
    column = config["column"]
    if not rows or column not in rows[0]:
        raise UserError(f"column {column!r} not found in {source}")
    values = [float(r[column]) for r in rows]
    min_pts = int(config["min_pts"]) if config["min_pts"] else None
    result = estimate_pivot(values, eps=config["eps"], min_pts=min_pts)
    payload = {
        "pivot": result.pivot,
        "largest_cluster": int(result.largest_cluster),
        "eps": result.params[0],
        "min_pts": int(result.params[1]),
        "labels": [int(x) for x in result.labels],
    }
    save_report([payload], out_dir / "calibration.json")
    print(f"pivot={result.pivot!r} largest_cluster={result.largest_cluster}")
    return 0


def _resolve_pivot(config: dict) -> float:
    if config["pivot"]:
        try:
            return float(config["pivot"])
        except ValueError:
            raise UserError(f"--pivot must be a number, got {config['pivot']!r}")
    if config["calibration"]:
        payload = load_report(config["calibration"])
        entry = payload[0] if isinstance(payload, list) else payload
        return float(entry["pivot"])
    raise UserError("select needs --pivot or --calibration")


def cmd_select(config: dict, out_dir: Path) -> int:
    paths, images, masks = _load_manifest_images(config)
    if not config["loss_csv"]:
        raise UserError("select needs --loss-csv with per-sample losses")
    loss_rows = load_report(config["loss_csv"])
    by_path = {r["path"]: float(r["loss"]) for r in loss_rows}
    missing = [p for p in paths if p not in by_path]
    if missing:
        raise UserError(f"loss CSV lacks entries for {len(missing)} manifest paths "
                        f"(first: {missing[0]})")
    losses = np.array([by_path[p] for p in paths])
    weights = _parse_weights(config["weights"])
    profiles = score_profiles(images, masks, weights=weights, jobs=config["jobs"])
    combined = np.array([p.combined for p in profiles])
    pivot = _resolve_pivot(config)
    cfg = selector_config(config)
    decision = run_selection_round(
        len(paths), cfg, pivot, config["method"],
        loss_fn=lambda ids: losses[ids],
        complexity_fn=lambda ids: combined[ids],
        iteration=0)
    rows = [{
        "path": paths[i],
        "loss": float(losses[i]),
        "complexity": float(combined[i]),
        "score": float(decision.scores[j]) if decision.scores is not None else "",
    } for j, i in enumerate(decision.subset_ids)]
    save_report(rows, out_dir / "scores.csv")
    chosen = [int(i) for i in decision.chosen_ids]
    save_report([{"method": config["method"], "pivot": pivot, "b": cfg.b,
                  "chosen_ids": chosen,
                  "chosen_paths": [paths[i] for i in chosen]}],
                out_dir / "chosen.json")
    print(f"chose {len(chosen)} of {decision.subset_ids.size} candidates")
    return 0


def _datasets(config: dict):
    size = config["size"]
    if config["manifest"]:
        _, images, masks = _load_manifest_images(config)
        train_imgs = np.stack([img.data for img in images])
        train_masks = np.stack([m.bits for m in masks])
        train_set = harness.InpaintingDataset(train_imgs, train_masks)
        if not config["test_manifest"]:
            raise UserError("training from a manifest also needs --test-manifest")
        test_cfg = dict(config, manifest=config["test_manifest"])
        _, t_images, t_masks = _load_manifest_images(test_cfg)
        test_set = harness.InpaintingDataset(
            np.stack([img.data for img in t_images]),
            np.stack([m.bits for m in t_masks]))
        return train_set, test_set
    seed = config["seed"]
    train_imgs = harness.synthetic_dataset(config["n_train"], size=size, seed=seed)
    test_imgs = harness.synthetic_dataset(config["n_test"], size=size, seed=seed + 5000)
    train_masks = harness.build_masks(config["n_train"], size, size, config["mask"],
                                      config["mask_ratio"], seed)
    test_masks = harness.build_masks(config["n_test"], size, size, config["mask"],
                                     config["mask_ratio"], seed + 9999)
    return (harness.InpaintingDataset(train_imgs, train_masks),
            harness.InpaintingDataset(test_imgs, test_masks))


def _record_rows(records):
    return [{
        "iteration": r.iteration,
        "train_loss": r.train_loss,
        "test_loss": "" if r.test_loss is None else r.test_loss,
        "method": r.method,
        "score_seconds": r.score_seconds,
        "select_seconds": r.select_seconds,
        "update_seconds": r.update_seconds,
        "iter_seconds": r.iter_seconds,
    } for r in records]


def cmd_train(config: dict, out_dir: Path) -> int:
    train_set, test_set = _datasets(config)
    cfg = selector_config(config)
    result = harness.train(train_set, test_set, cfg, config["method"],
                           config["iters"], learning_rate=config["lr"],
                           test_every=config["test_every"],
                           mask_mode=config["mask"],
                           mask_ratio=config["mask_ratio"],
                           norm_scope=config["norm_scope"])
    save_report(_record_rows(result.records), out_dir / "train_records.csv")
    print(f"method={config['method']} final_test_l1={result.final_test_loss!r} "
          f"({result.seconds:.1f}s)")
    return 0


def cmd_eval(config: dict, out_dir: Path) -> int:
    if not config["pred_dir"] or not config["truth_dir"]:
        raise UserError("eval needs --pred-dir and --truth-dir")
    pred_dir, truth_dir = Path(config["pred_dir"]), Path(config["truth_dir"])
    if not pred_dir.is_dir() or not truth_dir.is_dir():
        raise UserError("eval directories must exist")
    resize = int(config["resize"]) if config["resize"] else None
    names = sorted(p.name for p in pred_dir.iterdir()
                   if p.suffix.lower() in (".png", ".pgm", ".ppm"))
    if not names:
        raise UserError(f"no images found in {pred_dir}")
    rows = []
    for name in names:
        truth_path = truth_dir / name
        if not truth_path.exists():
            raise UserError(f"truth image missing for {name}")
        pred = load_image(pred_dir / name, size=resize)
        truth = load_image(truth_path, size=resize)
        rows.append({"file": name,
                     "psnr": psnr(pred, truth),
                     "ssim": ssim(pred, truth)})
    save_report(rows, out_dir / "quality.csv")
    print(f"wrote {out_dir / 'quality.csv'} ({len(rows)} rows)")
    return 0


def cmd_analyze(config: dict, out_dir: Path) -> int:
    train_set, test_set = _datasets(config)
    cfg = selector_config(config)
    result = harness.train(train_set, test_set, cfg, "random", config["iters"],
                           learning_rate=config["lr"],
                           test_every=config["test_every"],
                           mask_mode=config["mask"],
                           mask_ratio=config["mask_ratio"])
    pairs, r = harness.correlation_study(train_set, result.model)
    save_report(pairs, out_dir / "correlation.csv")
    save_report([{"pearson_r": "undefined" if r is None else r,
                  "samples": len(pairs), "iterations": config["iters"]}],
                out_dir / "correlation.json")
    print(f"pearson_r={'undefined' if r is None else repr(r)} over {len(pairs)} samples")
    return 0


def cmd_sweep(config: dict, out_dir: Path) -> int:
    try:
        ratios = [float(x) for x in config["ratios"].split(",") if x]
    except ValueError:
        raise UserError(f"--ratios must be comma-separated numbers, got {config['ratios']!r}")
    if not ratios:
        raise UserError("--ratios lists no values")
    train_set, test_set = _datasets(config)
    cfg = selector_config(config)
    rows = harness.sweep_ratio(train_set, test_set, cfg, ratios,
                               method=config["method"], iterations=config["iters"],
                               learning_rate=config["lr"],
                               test_every=config["test_every"])
    save_report(rows, out_dir / "ratio_sweep.csv")
    for row in rows:
        print(f"ratio={row['ratio']} final_test_l1={row['final_test_l1']!r} "
              f"iter_seconds={row['mean_iter_seconds']:.6f}")
    return 0


_COMMANDS = {
    "complexity": cmd_complexity,
    "calibrate": cmd_calibrate,
    "select": cmd_select,
    "train": cmd_train,
    "eval": cmd_eval,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="batchlens",
                     description="Complexity-guided mini-batch selection toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, flags):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="key=value config file; flags override it")
        p.add_argument("--out", help="output directory (default: runs)")
        p.add_argument("--seed", type=int,
                       help=f"RNG seed; falls back to ${SEED_ENV}, then 0")
        for flag, kwargs in flags.items():
            p.add_argument(flag, **kwargs)
        return p

    common_select = {
        "--method": dict(choices=("proposed", "fan", "kawaguchi", "jiang", "random"),
                         help="selection criterion"),
        "--b": dict(type=int, help="mini-batch size"),
        "--ratio": dict(type=float, help="candidate pool size as a multiple of b"),
        "--delta": dict(type=float, help="denominator floor for the ratio score"),
        "--beta": dict(type=float, help="CDF exponent for the probabilistic selector"),
        "--weights": dict(help="comma triple of SI,EG,TV weights summing to 1"),
    }
    data_flags = {
        "--size": dict(type=int, help="synthetic image side length"),
        "--n-train": dict(type=int, dest="n_train", help="synthetic training samples"),
        "--n-test": dict(type=int, dest="n_test", help="synthetic test samples"),
        "--mask": dict(choices=("regular", "irregular"), help="mask mode"),
        "--mask-ratio": dict(type=float, dest="mask_ratio",
                             help="target missing fraction for irregular masks"),
        "--manifest": dict(help="newline-separated image paths (instead of synthetic)"),
        "--test-manifest": dict(dest="test_manifest", help="manifest for the test split"),
        "--resize": dict(help="square size to which manifest images are resized"),
    }
    train_flags = {
        "--iters": dict(type=int, help="training iterations"),
        "--lr": dict(type=float, help="learning rate"),
        "--test-every": dict(type=int, dest="test_every",
                             help="test evaluation cadence in iterations"),
        "--norm-scope": dict(choices=("batch", "dataset"), dest="norm_scope",
                             help="population for complexity normalization"),
    }

    add("complexity", "Score manifest images: raw, normalized, combined metrics.",
        {"--manifest": dict(help="newline-separated image paths"),
         "--mask": dict(choices=("regular", "irregular"), help="mask mode"),
         "--mask-ratio": dict(type=float, dest="mask_ratio",
                              help="target missing fraction for irregular masks"),
         "--resize": dict(help="square resize for loaded images"),
         "--weights": dict(help="comma triple of SI,EG,TV weights"),
         "--jobs": dict(type=int, help="parallel scoring workers")})
    add("calibrate", "Estimate the pivot from a complexity CSV.",
        {"--loss-csv": dict(dest="loss_csv", help="complexity CSV to calibrate on"),
         "--column": dict(help="CSV column holding complexity values"),
         "--eps": dict(type=float, help="clustering neighbourhood radius"),
         "--min-pts": dict(dest="min_pts", help="clustering core threshold")})
    add("select", "Run one selection round over a manifest.",
        {**common_select,
         "--manifest": dict(help="newline-separated image paths"),
         "--mask": dict(choices=("regular", "irregular"), help="mask mode"),
         "--mask-ratio": dict(type=float, dest="mask_ratio",
                              help="target missing fraction for irregular masks"),
         "--resize": dict(help="square resize for loaded images"),
         "--loss-csv": dict(dest="loss_csv", help="CSV with path,loss columns"),
         "--calibration": dict(help="calibration JSON from the calibrate command"),
         "--pivot": dict(help="explicit pivot value"),
         "--jobs": dict(type=int, help="parallel scoring workers")})
    add("train", "Train the toy inpainter with a selection method.",
        {**common_select, **data_flags, **train_flags})
    add("eval", "PSNR/SSIM between matching images of two directories.",
        {"--pred-dir": dict(dest="pred_dir", help="directory of predictions"),
         "--truth-dir": dict(dest="truth_dir", help="directory of ground truth"),
         "--resize": dict(help="square resize before comparison")})
    add("analyze", "Loss-versus-complexity correlation after a short training.",
        {**{k: v for k, v in common_select.items() if k != "--method"},
         **data_flags, **train_flags})
    add("sweep", "Final quality and cost across candidate-pool ratios.",
        {**common_select, **data_flags, **train_flags,
         "--ratios": dict(help="comma-separated pool ratios to sweep")})
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = resolve_config(args)
        out_dir = Path(config["out"])
        write_resolved(config, out_dir)
        return _COMMANDS[args.command](config, out_dir)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1
    except Exception as exc:  # internal failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
