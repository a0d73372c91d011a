"""Command-line entry point: synth, train, eval, encode, bitmap, trace, compare, run."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .data import DEFAULT_RSS_HI, DEFAULT_RSS_LO, binarize_matrix, normalize_values
from .errors import ConfigError, LogNetError
from .evaluate import evaluate, latent_diff
from .experiment import (
    DEFAULT_EPOCHS,
    OUT_ROOT_ENV,
    ExperimentConfig,
    compare_models,
    run_experiment,
)
from .fileio import (
    read_fingerprints_csv,
    read_latents_csv,
    read_rp_map_csv,
    write_fingerprints_csv,
    write_latents_csv,
    write_rp_map_csv,
)
from .gates import GateType, LatentCode, LogicEncoderConfig, ceil_chain, encode_matrix
from .models import TrainConfig
from .noise import SynthSpec, synth_dataset
from .pgm import write_pgm
from .pipeline import fit_dnn, fit_lognet, load_model, save_model

GATE_NAMES = [g.value for g in GateType]


def _default_out(command: str) -> str:
    root = os.environ.get(OUT_ROOT_ENV, "runs")
    return os.path.join(root, command)


def _out_dir(args) -> Path:
    out = Path(args.out if args.out else _default_out(args.command))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["lognet", "dnn"], help="model family")
    p.add_argument("--gate", choices=GATE_NAMES, help="logic gate for lognet")
    p.add_argument("--hidden", type=int, metavar="N", help="number of hidden/logic layers")
    p.add_argument("--threshold", type=float, metavar="F", help="binarization threshold in (0,1)")


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lr", type=float, metavar="F", help="learning rate")
    p.add_argument("--epochs", type=int, metavar="N", help="training epochs")
    p.add_argument("--seed", type=int, metavar="N", help="seed for split/init/batching")
    p.add_argument("--batch-size", type=int, metavar="N", help="minibatch size (default full batch)")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", metavar="CSV", help="fingerprint CSV path")
    p.add_argument("--rp-map", metavar="CSV", help="RP coordinate CSV path")


def _add_noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise-mode", choices=["ed", "non-ed"], help="noise structure")
    p.add_argument("--delta", type=float, metavar="DB", help="ED delta in dB")
    p.add_argument("--delta-csv", metavar="CSV", help="per-AP deltas (ap_index,delta_db)")
    p.add_argument("--sigma", type=float, metavar="DB", help="stochastic jitter stddev in dB")
    p.add_argument("--noise-seed", type=int, metavar="N", help="noise seed")
    p.add_argument("--schedule", metavar="FILE", help="JSON temporal schedule [[ci, mult], ...]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lognet",
        description="Logic-gate fingerprint encoder, DNN baseline, noise simulator "
        "and evaluation harness for Wi-Fi RSS indoor localization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic CI:0 dataset")
    p.add_argument("--rps", type=int, required=True, help="number of reference points")
    p.add_argument("--aps", type=int, required=True, help="number of access points")
    p.add_argument("--per-rp", type=int, default=6, help="fingerprints per RP")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pattern", choices=["window", "random", "beacon-tint"], default="window")
    p.add_argument("--geometry", choices=["path", "grid"], default="path")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train one model on a full fingerprint CSV")
    _add_data_flags(p)
    _add_model_flags(p)
    _add_train_flags(p)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model on a (multi-CI) dataset")
    p.add_argument("--model-file", required=True, metavar="JSON", help="saved model path")
    _add_data_flags(p)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("encode", help="emit per-fingerprint latent codes as CSV")
    _add_data_flags(p)
    p.add_argument("--gate", choices=GATE_NAMES, default="nor")
    p.add_argument("--hidden", type=int, default=1)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("bitmap", help="render latent codes as a binary-pixel PGM")
    p.add_argument("--latents", required=True, metavar="CSV")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_bitmap)

    p = sub.add_parser("trace", help="diff two RPs' latents and trace bits to APs")
    p.add_argument("--latents", required=True, metavar="CSV")
    p.add_argument("--rp-a", type=int, required=True)
    p.add_argument("--rp-b", type=int, required=True)
    p.add_argument("--hidden", type=int, required=True, help="encoder depth used for the latents")
    p.add_argument("--ap-count", type=int, required=True, help="original AP count")
    p.add_argument("--out", metavar="DIR", help="also write trace.txt here")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("run", help="full pipeline: load/synth, split, train, simulate, evaluate")
    p.add_argument("--config", metavar="JSON", help="experiment config file; flags override")
    _add_data_flags(p)
    p.add_argument("--synth-rps", type=int, metavar="K")
    p.add_argument("--synth-aps", type=int, metavar="N")
    p.add_argument("--synth-per-rp", type=int, metavar="M")
    p.add_argument("--synth-seed", type=int, metavar="N")
    _add_model_flags(p)
    _add_train_flags(p)
    _add_noise_flags(p)
    p.add_argument("--holdout", type=int, metavar="N", help="test fingerprints per (RP, CI)")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several model variants on one dataset")
    p.add_argument("--config", metavar="JSON", help="base experiment config; flags override")
    _add_data_flags(p)
    p.add_argument("--synth-rps", type=int, metavar="K")
    p.add_argument("--synth-aps", type=int, metavar="N")
    p.add_argument("--synth-per-rp", type=int, metavar="M")
    p.add_argument("--synth-seed", type=int, metavar="N")
    p.add_argument(
        "--variants",
        required=True,
        help="comma list like lognet-nor-1,lognet-xor-1,dnn-1,dnn-2",
    )
    _add_train_flags(p)
    _add_noise_flags(p)
    p.add_argument("--holdout", type=int, metavar="N")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_compare)

    return parser


def cmd_synth(args) -> int:
    out = _out_dir(args)
    spec = SynthSpec(
        num_rps=args.rps,
        num_aps=args.aps,
        fingerprints_per_rp=args.per_rp,
        seed=args.seed,
        base_pattern=args.pattern,
        geometry=args.geometry,
    )
    ds, rp_map = synth_dataset(spec)
    write_fingerprints_csv(ds, out / "fingerprints.csv")
    write_rp_map_csv(rp_map, out / "rp_map.csv")
    print(f"wrote {len(ds)} fingerprints ({args.rps} RPs x {args.aps} APs) to {out}")
    return 0


def _train_config(args, family: str) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr if args.lr is not None else 0.01,
        epochs=args.epochs if args.epochs is not None else DEFAULT_EPOCHS[family],
        seed=args.seed if args.seed is not None else 0,
        batch_size=args.batch_size,
    )


def cmd_train(args) -> int:
    if not args.data:
        raise ConfigError("train requires --data")
    out = _out_dir(args)
    ds = read_fingerprints_csv(args.data)
    family = args.model or "lognet"
    cfg = _train_config(args, family)
    if family == "lognet":
        encoder = LogicEncoderConfig(
            GateType.from_name(args.gate or "nor"),
            args.threshold if args.threshold is not None else 0.5,
            args.hidden if args.hidden is not None else 1,
        )
        clf, history = fit_lognet(ds, encoder, cfg)
    else:
        clf, history = fit_dnn(ds, args.hidden if args.hidden is not None else 1, cfg)
    save_model(clf, out / "model.json")
    print(f"trained {family} on {len(ds)} fingerprints; final loss {history[-1]:.6f}")
    print(f"model written to {out / 'model.json'}")
    return 0


def cmd_eval(args) -> int:
    if not args.data or not args.rp_map:
        raise ConfigError("eval requires --data and --rp-map")
    out = _out_dir(args)
    clf = load_model(args.model_file)
    ds = read_fingerprints_csv(args.data)
    rp_map = read_rp_map_csv(args.rp_map)
    report = evaluate(clf, ds, rp_map)
    report.write(out / "report.json")
    for ci, stats in sorted(report.per_ci.items()):
        print(
            f"ci {ci}: mean {stats.mean_error_m:.3f} m  "
            f"min {stats.min_error_m:.3f}  max {stats.max_error_m:.3f}  "
            f"accuracy {stats.accuracy:.3f}"
        )
    print(f"report written to {out / 'report.json'}")
    return 0


def cmd_encode(args) -> int:
    if not args.data:
        raise ConfigError("encode requires --data")
    out = _out_dir(args)
    ds = read_fingerprints_csv(args.data)
    encoder = LogicEncoderConfig(GateType.from_name(args.gate), args.threshold, args.hidden)
    norm = normalize_values(ds.rss_matrix(), DEFAULT_RSS_LO, DEFAULT_RSS_HI)
    latents = encode_matrix(binarize_matrix(norm, encoder.threshold), encoder.gate, encoder.hidden_layers)
    write_latents_csv([fp.rp_id for fp in ds], latents, out / "latents.csv")
    print(f"encoded {len(ds)} fingerprints into {latents.shape[1]}-bit latents at {out / 'latents.csv'}")
    return 0


def _majority_rows(rp_ids: np.ndarray, bits: np.ndarray) -> tuple[list[int], np.ndarray]:
    order = sorted(set(int(r) for r in rp_ids))
    rows = []
    for rp in order:
        group = bits[rp_ids == rp]
        ones = group.sum(axis=0, dtype=np.int64)
        rows.append((2 * ones >= len(group)).astype(np.uint8))
    return order, np.stack(rows)


def cmd_bitmap(args) -> int:
    out = _out_dir(args)
    rp_ids, bits = read_latents_csv(args.latents)
    _, rows = _majority_rows(rp_ids, bits)
    write_pgm(rows * np.uint8(255), out / "latent_bitmap.pgm")
    print(f"wrote {rows.shape[0]}x{rows.shape[1]} bitmap to {out / 'latent_bitmap.pgm'}")
    return 0


def cmd_trace(args) -> int:
    rp_ids, bits = read_latents_csv(args.latents)
    expected = ceil_chain(args.ap_count, args.hidden)
    if bits.shape[1] != expected:
        raise ConfigError(
            f"latents have {bits.shape[1]} bits but depth {args.hidden} over "
            f"{args.ap_count} APs implies {expected}"
        )

    def codes_for(rp: int) -> list[LatentCode]:
        rows = bits[rp_ids == rp]
        if rows.shape[0] == 0:
            raise ConfigError(f"no latents for rp {rp} in {args.latents}")
        return [LatentCode(row, args.hidden, args.ap_count) for row in rows]

    diff = latent_diff(codes_for(args.rp_a), codes_for(args.rp_b), args.rp_a, args.rp_b)
    table = diff.format_table()
    print(table)
    if args.out:
        out = _out_dir(args)
        (out / "trace.txt").write_text(table + "\n", encoding="utf-8")
        print(f"trace written to {out / 'trace.txt'}")
    return 0


def _load_config_doc(args) -> tuple[dict, str]:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            doc = json.load(fh)
        base_dir = os.path.dirname(os.path.abspath(args.config))
    else:
        doc, base_dir = {}, "."
    return doc, base_dir


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _flag_overrides(args) -> dict:
    """Map provided CLI flags onto the config-file schema (flags win)."""
    over: dict = {}
    if getattr(args, "data", None):
        over["data"] = {
            "fingerprints": os.path.abspath(args.data),
            "rp_map": os.path.abspath(args.rp_map) if args.rp_map else None,
        }
    synth_over = {}
    for flag, key in (
        ("synth_rps", "num_rps"),
        ("synth_aps", "num_aps"),
        ("synth_per_rp", "fingerprints_per_rp"),
        ("synth_seed", "seed"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            synth_over[key] = value
    if synth_over:
        over["synth"] = synth_over
    model_over = {}
    if getattr(args, "model", None):
        model_over["family"] = args.model
    if getattr(args, "gate", None):
        model_over["gate"] = args.gate
    if getattr(args, "hidden", None) is not None:
        model_over["hidden_layers"] = args.hidden
    if getattr(args, "threshold", None) is not None:
        model_over["threshold"] = args.threshold
    if model_over:
        over["model"] = model_over
    train_over = {}
    if getattr(args, "lr", None) is not None:
        train_over["learning_rate"] = args.lr
    if getattr(args, "epochs", None) is not None:
        train_over["epochs"] = args.epochs
    if getattr(args, "seed", None) is not None:
        train_over["seed"] = args.seed
    if getattr(args, "batch_size", None) is not None:
        train_over["batch_size"] = args.batch_size
    if train_over:
        over["train"] = train_over
    noise_over = {}
    if getattr(args, "noise_mode", None):
        noise_over["mode"] = args.noise_mode
    if getattr(args, "delta", None) is not None:
        noise_over["delta"] = args.delta
    if getattr(args, "delta_csv", None):
        noise_over["delta_csv"] = os.path.abspath(args.delta_csv)
    if getattr(args, "sigma", None) is not None:
        noise_over["sigma"] = args.sigma
    if getattr(args, "noise_seed", None) is not None:
        noise_over["seed"] = args.noise_seed
    if noise_over:
        over["noise"] = noise_over
    if getattr(args, "schedule", None):
        with open(args.schedule, encoding="utf-8") as fh:
            sched = json.load(fh)
        over["schedule"] = sched["entries"] if isinstance(sched, dict) else sched
    if getattr(args, "holdout", None) is not None:
        over["per_rp_holdout"] = args.holdout
    if getattr(args, "out", None):
        over["out_dir"] = os.path.abspath(args.out)
    return over


def _prefer_synth(doc: dict) -> None:
    """A synth spec wins unless fingerprint paths were explicitly given."""
    if doc.get("synth") and not (doc.get("data") or {}).get("fingerprints"):
        doc["data"] = None


def _experiment_config(args) -> ExperimentConfig:
    doc, base_dir = _load_config_doc(args)
    merged = _deep_merge(doc, _flag_overrides(args))
    merged.setdefault("out_dir", _default_out(args.command))
    _prefer_synth(merged)
    return ExperimentConfig.from_dict(merged, base_dir)


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    report = run_experiment(cfg)
    for ci, stats in sorted(report.per_ci.items()):
        print(f"ci {ci}: mean error {stats.mean_error_m:.3f} m  accuracy {stats.accuracy:.3f}")
    print(f"artifacts in {cfg.out_dir}")
    return 0


def _parse_variant(text: str) -> dict:
    parts = text.strip().lower().split("-")
    if parts[0] == "dnn":
        model = {"family": "dnn", "gate": None}
        depth = parts[1] if len(parts) > 1 else None
    elif parts[0] == "lognet":
        if len(parts) < 2:
            raise ConfigError(f"variant '{text}' needs a gate, e.g. lognet-nor-1")
        model = {"family": "lognet", "gate": parts[1]}
        depth = parts[2] if len(parts) > 2 else None
    else:
        raise ConfigError(f"variant '{text}' must start with 'lognet' or 'dnn'")
    if depth is not None:
        model["hidden_layers"] = int(depth)
    return model


def cmd_compare(args) -> int:
    doc, base_dir = _load_config_doc(args)
    merged = _deep_merge(doc, _flag_overrides(args))
    root = merged.get("out_dir") or _default_out(args.command)
    if not os.path.isabs(root):
        root = os.path.join(base_dir if merged.get("out_dir") else ".", root)
    out_root = Path(root)
    out_root.mkdir(parents=True, exist_ok=True)

    variants = [v for v in args.variants.split(",") if v.strip()]
    if not variants:
        raise ConfigError("--variants must list at least one model variant")
    cfgs = []
    for name in variants:
        variant_doc = _deep_merge(merged, {"model": _parse_variant(name)})
        variant_doc["out_dir"] = str(out_root / name.strip().lower())
        _prefer_synth(variant_doc)
        cfgs.append(ExperimentConfig.from_dict(variant_doc, base_dir))
    table = compare_models(cfgs)
    table.to_csv(out_root / "comparison.csv")
    text = table.format_text()
    (out_root / "comparison.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    print(f"comparison written to {out_root}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LogNetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
