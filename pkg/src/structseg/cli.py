"""Command-line pipeline driver.

Subcommands:

* ``run``      one image through extract -> fit -> sample -> artifacts
* ``metrics``  metric report for a (pred, gt) mask pair
* ``synth``    materialize a synthetic workspace entry for the service/UI
* ``serve``    start the HTTP/JSON service (see service module)

``run`` reads a JSON config (flags override single fields) and writes
deterministic artifacts: sampled masks, uncertainty maps (raw-float), the
branch persistence CSV, skeleton CSV, fitted distribution JSON, and a metric
report when ground truth is given. Any module error exits 1 with a
machine-readable JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from . import raster_io
from .errors import StructsegError
from .family import SkeletonFamily
from .morse import extract_morse_complex
from .prob import ThresholdDistribution, fit_threshold_distribution
from .segment import (
    analytic_branch_uncertainty,
    binarize,
    empirical_uncertainty,
    grow_segmentation,
    sample_segmentations,
)
from .synth import line_grid, two_bump
from .watershed import boundary_skeleton_family, ph_watershed

DEFAULT_CONFIG = {
    "field": None,
    "gt": None,
    "mode": "morse",  # or "watershed"
    "tau": 0.5,
    "alpha": 1.0,
    "beta": 10.0,
    "mc_samples": 16,
    "samples": 10,
    "seed": 0,
    "thetas": [0.1, 0.2, 0.4],
    "patch_size": 65,
    "patch_count": 100,
    "out_dir": "out",
}


def _fail(kind: str, message: str, **extra) -> int:
    payload = {"error": {"type": kind, "message": message, **extra}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return 1


def _load_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    if args.config:
        cfg.update(json.loads(Path(args.config).read_text()))
    for key in (
        "field", "gt", "mode", "tau", "samples", "seed", "out_dir",
        "patch_size", "patch_count",
    ):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _fmt(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.17g}"


def _write_branch_csv(family: SkeletonFamily, path: Path) -> None:
    lines = ["id,persistence,pixel_count,endpoints"]
    for bid, pers, count, ends in family.branch_table():
        ends_txt = ";".join(f"{x}:{y}" for y, x in ends)
        lines.append(f"{bid},{_fmt(pers)},{count},{ends_txt}")
    path.write_text("\n".join(lines) + "\n")


def cli_run(cfg: dict) -> int:
    cfg = {**DEFAULT_CONFIG, **cfg}
    if not cfg.get("field"):
        return _fail("MissingInput", "config has no input field path", path="field")
    field_path = Path(cfg["field"])
    if not field_path.exists():
        return _fail("MissingInput", f"input path does not exist: {field_path}",
                     path=str(field_path))
    field = raster_io.load_field(field_path)
    gt = raster_io.load_mask(cfg["gt"]) if cfg.get("gt") else None
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg["mode"] == "watershed":
        thetas = list(cfg["thetas"])
        family = boundary_skeleton_family(field, thetas)
        _, pd, _ = ph_watershed(field, math.inf)
        raster_io.export_diagram(pd, out_dir / "diagram.csv")
    elif cfg["mode"] == "morse":
        family = extract_morse_complex(field)
    else:
        return _fail("BadConfig", f"unknown mode {cfg['mode']!r}")

    _write_branch_csv(family, out_dir / "branches.csv")
    raster_io.export_skeleton(
        {b.id: b.pixels for b in family.branches}, out_dir / "skeleton.csv"
    )

    binary = binarize(field, float(cfg["tau"]))
    if gt is not None:
        dist = fit_threshold_distribution(
            field, gt, family, lambda sk: grow_segmentation(binary, sk).mask
        )
    else:
        finite = family.finite_persistences()
        lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
        dist = ThresholdDistribution((lo + hi) / 2.0, max((hi - lo) / 4.0, 1e-3))
    (out_dir / "distribution.json").write_text(
        json.dumps(dist.to_json(), sort_keys=True) + "\n"
    )

    rng = np.random.default_rng(int(cfg["seed"]))
    samples = sample_segmentations(
        field, family, dist, int(cfg["samples"]), rng, tau=float(cfg["tau"])
    )
    for i, seg in enumerate(samples):
        raster_io.save_mask(seg.mask, out_dir / f"sample_{i:03d}.pgm")
    if len(samples) >= 2:
        raster_io.save_field(
            empirical_uncertainty(samples), out_dir / "uncertainty_empirical.f32"
        )
    if dist.sigma > 0:
        _, umap = analytic_branch_uncertainty(family, dist)
        raster_io.save_field(umap, out_dir / "uncertainty_analytic.f32")

    if gt is not None:
        rep = metrics_mod.report(
            samples[0].mask, gt,
            patch_size=int(cfg["patch_size"]),
            patches=int(cfg["patch_count"]),
            seed=int(cfg["seed"]),
        )
        (out_dir / "metrics.json").write_text(rep.to_json() + "\n")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    pred = raster_io.load_mask(args.pred)
    gt = raster_io.load_mask(args.gt)
    rep = metrics_mod.report(
        pred, gt, patch_size=args.patch_size, patches=args.patch_count,
        seed=args.seed,
    )
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    out = Path(args.workspace) / args.name
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "two_bump":
        field, _ = two_bump(args.width, args.height, 1.0, 0.8, 0.6)
        gt = binarize(field, 0.7)
    elif args.kind == "line_grid":
        field, gt, _ = line_grid(
            args.width, args.height, args.spacing,
            noise_amp=args.noise, seed=args.seed,
        )
    else:
        return _fail("BadConfig", f"unknown synth kind {args.kind!r}")
    raster_io.save_field(field, out / "field.f32")
    raster_io.save_mask(gt, out / "gt.pgm")
    print(str(out))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import os

    import uvicorn

    from .service import create_app

    workspace = args.workspace or os.environ.get("WORKSPACE_DIR")
    if not workspace:
        return _fail("BadConfig", "pass --workspace or set WORKSPACE_DIR")
    port = args.port if args.port is not None else int(os.environ.get("PORT", "8000"))
    app = create_app(workspace)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="structseg")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the inference pipeline on one image")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--field")
    run.add_argument("--gt")
    run.add_argument("--mode", choices=["morse", "watershed"])
    run.add_argument("--tau", type=float)
    run.add_argument("--samples", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out-dir", dest="out_dir")

    met = sub.add_parser("metrics", help="metric report for a mask pair")
    met.add_argument("--pred", required=True)
    met.add_argument("--gt", required=True)
    met.add_argument("--patch-size", type=int, default=65)
    met.add_argument("--patch-count", type=int, default=100)
    met.add_argument("--seed", type=int, default=0)
    met.add_argument("--out")

    syn = sub.add_parser("synth", help="write a synthetic workspace entry")
    syn.add_argument("--workspace", required=True)
    syn.add_argument("--name", required=True)
    syn.add_argument("--kind", choices=["two_bump", "line_grid"], default="line_grid")
    syn.add_argument("--width", type=int, default=48)
    syn.add_argument("--height", type=int, default=48)
    syn.add_argument("--spacing", type=int, default=12)
    syn.add_argument("--noise", type=float, default=0.25)
    syn.add_argument("--seed", type=int, default=0)

    srv = sub.add_parser("serve", help="start the HTTP/JSON service")
    srv.add_argument("--workspace", default=None)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cli_run(_load_config(args))
        if args.command == "metrics":
            return cmd_metrics(args)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "serve":
            return cmd_serve(args)
    except StructsegError as exc:
        return _fail(type(exc).__name__, str(exc))
    except FileNotFoundError as exc:
        return _fail("MissingInput", str(exc), path=str(exc.filename))
    return 2


if __name__ == "__main__":
    sys.exit(main())
