"""Batch command-line front end.

Subcommands:
    enhance   enhance a file or directory of images
    evaluate  PSNR/SSIM of an output directory against a reference directory
    ablate    sweep L / window side / loss-term masks on one image

Config precedence: built-in defaults < --config JSON file < explicit flags.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import pipeline
from .errors import LumifitError
from .image_ops import ContextWindowSpec, decode_image, encode_image
from .metrics import psnr, ssim

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON config file")
    p.add_argument("--L", type=float, default=None, help="exposure target level")
    p.add_argument("--window", type=int, default=None, help="context window side (odd)")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--weights", type=str, default=None, metavar="a,b,c,d",
                   help="fidelity,smoothness,exposure,sparsity weights")
    p.add_argument("--working-size", type=int, default=None)
    p.add_argument("--gf-radius", type=int, default=None, help="guided filter radius")
    p.add_argument("--gf-eps", type=float, default=None, help="guided filter regularization")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--print-config", action="store_true",
                   help="print the effective config as JSON and exit")


def _build_config(args: argparse.Namespace, parser: argparse.ArgumentParser):
    data: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file: {exc}")
    if args.weights is not None:
        parts = args.weights.split(",")
        if len(parts) != 4:
            parser.error("--weights expects four comma-separated numbers a,b,c,d")
        try:
            a, b, g, d = (float(x) for x in parts)
        except ValueError:
            parser.error("--weights expects numeric values")
        data.setdefault("weights", {})
        data["weights"] = {"alpha": a, "beta": b, "gamma": g, "delta": d}
    if args.L is not None:
        data.setdefault("exposure", {})["target_L"] = args.L
    if args.window is not None:
        data["window"] = {"side": args.window}
    if args.gf_radius is not None:
        data.setdefault("guided", {})["radius"] = args.gf_radius
    if args.gf_eps is not None:
        data.setdefault("guided", {})["regularization_eps"] = args.gf_eps
    for flag, key in (
        ("epochs", "epochs"),
        ("lr", "lr"),
        ("working_size", "working_size"),
        ("seed", "seed"),
    ):
        value = getattr(args, flag)
        if value is not None:
            data[key] = value
    try:
        return pipeline.EnhancementConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        parser.error(f"invalid configuration: {exc}")


def _collect_images(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(p for p in path.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    return [path]


def _enhance_one(task: tuple) -> dict:
    src, out_dir, cfg_dict, want_trace = task
    src = Path(src)
    out_dir = Path(out_dir)
    cfg = pipeline.EnhancementConfig.from_dict(cfg_dict)
    record: dict = {"input": str(src), "output": None, "wall_time": None, "error": None}
    try:
        img = decode_image(src.read_bytes())
        enhanced, trace = pipeline.enhance(img, cfg)
        suffix = src.suffix.lower() if src.suffix.lower() in _IMAGE_SUFFIXES else ".png"
        dest = out_dir / f"{src.stem}_enhanced{suffix}"
        fmt = "png" if suffix == ".png" else "jpeg"
        dest.write_bytes(encode_image(enhanced, format=fmt))
        if want_trace:
            pipeline.write_trace_jsonl(trace, out_dir / f"{src.stem}_trace.jsonl")
        record["output"] = str(dest)
        record["wall_time"] = trace.wall_time
    except (LumifitError, OSError, ValueError) as exc:
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


def _reference_metrics(record: dict, reference_dir: Path) -> None:
    ref_path = reference_dir / Path(record["input"]).name
    if record["error"] or not ref_path.exists():
        return
    out = decode_image(Path(record["output"]).read_bytes())
    ref = decode_image(ref_path.read_bytes())
    if out.shape != ref.shape:
        record["metrics"] = None
        return
    p = psnr(out, ref)
    record["metrics"] = {"psnr_db": "inf" if math.isinf(p) else p, "ssim": ssim(out, ref)}


def cmd_enhance(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _build_config(args, parser)
    if args.print_config:
        print(json.dumps(cfg.as_dict(), indent=2))
        return 0
    if args.input is None or args.output is None:
        parser.error("--input and --output are required")
    if not args.input.exists():
        parser.error(f"input path {args.input} does not exist")
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = _collect_images(args.input)
    if not files:
        parser.error(f"no images found under {args.input}")

    tasks = [(str(f), str(out_dir), cfg.as_dict(), args.trace) for f in files]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(_enhance_one, tasks))
    else:
        records = [_enhance_one(t) for t in tasks]

    if args.reference is not None:
        for record in records:
            _reference_metrics(record, Path(args.reference))

    manifest = {"config": cfg.as_dict(), "results": records}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    failures = [r for r in records if r["error"]]
    for r in records:
        status = "FAILED: " + r["error"] if r["error"] else f"-> {r['output']}"
        print(f"{r['input']} {status}")
    return 1 if failures else 0


def _fmt_metric(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def cmd_evaluate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    enhanced_dir, reference_dir = Path(args.input), Path(args.reference)
    if not enhanced_dir.is_dir() or not reference_dir.is_dir():
        parser.error("--input and --reference must be directories")
    enhanced = {p.name: p for p in _collect_images(enhanced_dir)}
    reference = {p.name: p for p in _collect_images(reference_dir)}
    shared = sorted(enhanced.keys() & reference.keys())
    for missing in sorted(enhanced.keys() ^ reference.keys()):
        print(f"warning: {missing} present on one side only, skipped", file=sys.stderr)
    if not shared:
        parser.error("no filenames in common between the two directories")

    rows = []
    for name in shared:
        a = decode_image(enhanced[name].read_bytes())
        b = decode_image(reference[name].read_bytes())
        rows.append((name, psnr(a, b), ssim(a, b)))
    mean_psnr = sum(r[1] for r in rows) / len(rows)
    mean_ssim = sum(r[2] for r in rows) / len(rows)

    out_dir = Path(args.output) if args.output else enhanced_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "metrics.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "psnr_db", "ssim"])
        for name, p, s in rows:
            writer.writerow([name, _fmt_metric(p), f"{s:.6f}"])
        writer.writerow(["mean", _fmt_metric(mean_psnr), f"{mean_ssim:.6f}"])

    width = max(len(r[0]) for r in rows + [("mean", 0, 0)])
    print(f"{'name':<{width}}  {'psnr_db':>8}  {'ssim':>7}")
    for name, p, s in rows:
        print(f"{name:<{width}}  {_fmt_metric(p):>8}  {s:>7.4f}")
    print(f"{'mean':<{width}}  {_fmt_metric(mean_psnr):>8}  {mean_ssim:>7.4f}")
    print(f"csv written to {csv_path}")
    return 0


def cmd_ablate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    cfg = _build_config(args, parser)
    if args.print_config:
        print(json.dumps(cfg.as_dict(), indent=2))
        return 0
    if args.input is None or args.output is None:
        parser.error("--input and --output are required")
    kind_raw = args.sweep[0]
    kind = {"l": "L", "window": "window", "loss-mask": "loss_mask"}.get(kind_raw.lower())
    if kind is None:
        parser.error(f"unknown sweep kind {kind_raw!r} (expected L, window or loss-mask)")
    if len(args.sweep) > 1:
        raw_values = args.sweep[1].split(",")
    elif kind == "loss_mask":
        raw_values = list(pipeline.LOSS_MASKS)
    else:
        parser.error(f"sweep kind {kind_raw!r} needs a comma-separated value list")
    try:
        if kind == "L":
            values = [float(v) for v in raw_values]
        elif kind == "window":
            values = [int(v) for v in raw_values]
        else:
            values = [v.replace("-", "_") for v in raw_values]
    except ValueError:
        parser.error(f"bad sweep values {raw_values!r} for kind {kind_raw!r}")

    src = Path(args.input)
    if not src.is_file():
        parser.error(f"--input must be a single image file, got {src}")
    img = decode_image(src.read_bytes())
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        rows = pipeline.ablate(img, cfg, kind, values)
    except (LumifitError, ValueError) as exc:
        parser.error(str(exc))

    csv_path = out_dir / "ablation.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting", "mean_value", "final_total", "final_fidelity",
                        "final_smoothness", "final_exposure", "final_sparsity"])
        for row in rows:
            sub = out_dir / f"{kind_raw.lower()}_{row.setting}"
            sub.mkdir(exist_ok=True)
            (sub / f"{src.stem}_enhanced.png").write_bytes(encode_image(row.enhanced))
            if args.trace:
                pipeline.write_trace_jsonl(row.trace, sub / f"{src.stem}_trace.jsonl")
            last = row.trace.reports[-1]
            writer.writerow([
                row.setting, f"{row.mean_value:.6f}", f"{row.final_total:.6f}",
                f"{last.fidelity:.6f}", f"{last.smoothness:.6f}",
                f"{last.exposure:.6f}", f"{last.sparsity:.6f}",
            ])
    print(f"{len(rows)} settings written under {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lumifit",
                                     description="Zero-shot low-light image enhancement")
    sub = parser.add_subparsers(dest="command", required=True)

    p_enh = sub.add_parser("enhance", help="enhance a file or directory")
    p_enh.add_argument("--input", type=Path, default=None, help="image file or directory")
    p_enh.add_argument("--output", type=Path, default=None, help="output directory")
    p_enh.add_argument("--reference", type=Path, default=None,
                       help="directory of reference images for manifest metrics")
    p_enh.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_enh.add_argument("--trace", action="store_true", help="write per-image JSONL traces")
    _add_config_flags(p_enh)

    p_eval = sub.add_parser("evaluate", help="PSNR/SSIM against a reference directory")
    p_eval.add_argument("--input", type=Path, required=True, help="enhanced image directory")
    p_eval.add_argument("--reference", type=Path, required=True, help="reference directory")
    p_eval.add_argument("--output", type=Path, default=None, help="directory for metrics.csv")

    p_abl = sub.add_parser("ablate", help="run a parameter sweep on one image")
    p_abl.add_argument("--input", type=Path, default=None, help="single image file")
    p_abl.add_argument("--output", type=Path, default=None, help="output directory")
    p_abl.add_argument("--sweep", nargs="+", required=True, metavar=("KIND", "VALUES"),
                       help='e.g. "--sweep L 0.3,0.5,0.7,0.9" or "--sweep loss-mask"')
    p_abl.add_argument("--trace", action="store_true", help="write JSONL traces per setting")
    _add_config_flags(p_abl)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "enhance":
        return cmd_enhance(args, parser)
    if args.command == "evaluate":
        return cmd_evaluate(args, parser)
    return cmd_ablate(args, parser)


if __name__ == "__main__":
    sys.exit(main())
