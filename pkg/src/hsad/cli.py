"""Command-line front end: detect, synth, eval, export."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, apply_key, config_items, load_config
from .envi import load_envi, read_pgm, save_envi, write_pgm
from .evaluate import roc_auc, write_roc_csv, write_summary_csv
from .hsi import Hsi, minmax_normalize
from .pipeline import detect
from .synth import SceneSpec, gen_scene


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage


def _load_map(path: str) -> np.ndarray:
    """Read a single-band map from an ENVI header/payload or a PGM."""
    if path.endswith(".pgm"):
        return read_pgm(path).astype(np.float64) / 65535.0
    cube = load_envi(path if path.endswith(".hdr") else path + ".hdr")
    if cube.bands != 1:
        raise ValueError(f"expected a single-band map, got {cube.bands} bands")
    return cube.data[:, :, 0].astype(np.float64)


def _save_map(values: np.ndarray, stem: str) -> None:
    """Write both the raw float32 map and its 16-bit PGM heatmap."""
    raw = np.asarray(values, dtype=np.float32)
    save_envi(Hsi(raw[:, :, None]), stem + ".img")
    write_pgm(minmax_normalize(raw.astype(np.float64)), stem + ".pgm")


def _write_manifest(path: str, entries) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in entries:
            fh.write(f"{key} = {value}\n")


def _build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    for key in ("mode", "ops"):
        value = getattr(args, key, None)
        if value is not None:
            apply_key(cfg, key, value)
    if getattr(args, "seed", None) is not None:
        apply_key(cfg, "seed", str(args.seed))
    if getattr(args, "snr", None) is not None:
        apply_key(cfg, "snr_db", str(args.snr))
    return cfg.validate()


def cmd_detect(args) -> int:
    cfg = _build_config(args)
    try:
        cube = load_envi(args.input if args.input.endswith(".hdr") else args.input + ".hdr")
    except Exception as exc:
        raise StageError("load", exc) from exc
    try:
        result = detect(cube, cfg)
    except Exception as exc:
        raise StageError("pipeline", exc) from exc

    try:
        os.makedirs(args.output, exist_ok=True)
        entries = [("command", "detect"), ("version", __version__), ("input", args.input)]
        entries += config_items(cfg)
        entries.append(("alpha", repr(result.alpha)))

        d_classical = result.classical.astype(np.float32)
        _save_map(d_classical, os.path.join(args.output, "d_classical"))
        outputs = ["d_classical"]
        if result.quantum is not None:
            d_quantum = result.quantum.astype(np.float32)
            _save_map(d_quantum, os.path.join(args.output, "d_quantum"))
            outputs.append("d_quantum")
        if result.fused is not None:
            # multiply the float32 maps so the product reloads bit-exactly
            d_fused = d_classical * result.quantum.astype(np.float32)
            _save_map(d_fused, os.path.join(args.output, "d_fused"))
            outputs.append("d_fused")
        if result.band_energy is not None:
            energy_path = os.path.join(args.output, "band_energy.csv")
            with open(energy_path, "w", encoding="utf-8") as fh:
                fh.write("band,energy\n")
                for i, e in enumerate(result.band_energy):
                    fh.write(f"{i},{e!r}\n")
            entries.append(("band_energy_csv", "band_energy.csv"))
        for stage, seconds in result.stage_seconds.items():
            entries.append((f"time_{stage}_s", f"{seconds:.3f}"))
        entries.append(("outputs", ",".join(outputs)))
        entries.append(("numpy_version", np.__version__))
        _write_manifest(os.path.join(args.output, "manifest.txt"), entries)
    except OSError as exc:
        raise StageError("write", exc) from exc
    print(f"detect: wrote {', '.join(outputs)} to {args.output}")
    return 0


def cmd_synth(args) -> int:
    spec = SceneSpec(
        height=args.height,
        width=args.width,
        bands=args.bands,
        n_endmembers=args.endmembers,
        n_anomalies=args.anomalies,
        anomaly_size=args.size,
        snr_db=args.snr,
        seed=args.seed,
    )
    try:
        scene, reference = gen_scene(spec)
    except Exception as exc:
        raise StageError("synth", exc) from exc
    try:
        os.makedirs(args.output, exist_ok=True)
        save_envi(scene, os.path.join(args.output, "scene.img"))
        write_pgm(reference.astype(np.float64), os.path.join(args.output, "reference.pgm"))
    except OSError as exc:
        raise StageError("write", exc) from exc
    print(f"synth: scene.img + reference.pgm in {args.output} (seed {args.seed})")
    return 0


def cmd_eval(args) -> int:
    try:
        scores = _load_map(args.scores)
        reference = (_load_map(args.reference) > 0).astype(np.uint8)
    except Exception as exc:
        raise StageError("load", exc) from exc
    if scores.shape != reference.shape:
        raise StageError(
            "eval",
            ValueError(f"scores shape {scores.shape} != reference shape {reference.shape}"),
        )
    try:
        roc = roc_auc(scores, reference)
        os.makedirs(args.output, exist_ok=True)
        write_roc_csv(roc, os.path.join(args.output, "roc.csv"))
        write_summary_csv({args.name: roc.auc}, os.path.join(args.output, "metrics.csv"))
    except StageError:
        raise
    except Exception as exc:
        raise StageError("eval", exc) from exc
    print(f"auc,{roc.auc}")
    return 0


def cmd_export(args) -> int:
    try:
        values = _load_map(args.input)
        write_pgm(minmax_normalize(values), args.output)
    except Exception as exc:
        raise StageError("export", exc) from exc
    print(f"export: wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsad", description="Fuzzy-quantum hyperspectral anomaly detection"
    )
    parser.add_argument("--version", action="version", version=f"hsad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the detection pipeline on an ENVI cube")
    p.add_argument("--input", required=True, help="ENVI payload (or .hdr) path")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--mode", choices=["classical", "quantum", "fused"])
    p.add_argument("--ops", choices=["einstein", "minmax"])
    p.add_argument("--seed", type=int)
    p.add_argument("--snr", type=float, help="add Gaussian noise at this SNR (dB)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("synth", help="generate a synthetic scene with anomalies")
    p.add_argument("--output", required=True)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--bands", type=int, default=30)
    p.add_argument("--endmembers", type=int, default=4)
    p.add_argument("--anomalies", type=int, default=5)
    p.add_argument("--size", type=int, default=3, help="pixels per anomaly blob (1-9)")
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score a detection map against a reference mask")
    p.add_argument("--scores", required=True, help="ENVI map or PGM")
    p.add_argument("--reference", required=True, help="reference mask (PGM or ENVI)")
    p.add_argument("--output", required=True)
    p.add_argument("--name", default="scene", help="dataset label for the summary CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="convert a raw map to a 16-bit PGM heatmap")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error [config] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
