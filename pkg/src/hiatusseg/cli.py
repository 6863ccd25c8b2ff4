"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 numerical failure. Set
``HIATUSSEG_VERBOSITY`` to 0 (errors only), 1 (warnings, default), 2 (info)
or 3 (debug).
"""
import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, build_dataclass, dataclass_values, dump_config, load_config
from .energies import ModelParams
from .evolution import CvParams, DrlseParams, StopReason, evolve_cv, evolve_drlse
from .grid import mask_boundary, mask_from_levelset
from .imageio import read_image, read_mask, to_uint8, to_unit, write_mask, write_overlay, write_pgm
from .metrics import score, summarize
from .phantoms import RNG_ALGORITHM, generate, spec_from_config, spec_to_config
from .pipeline import Ellipse, PipelineConfig, PipelineError, run_pipeline, seed_to_levelset

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
VERBOSITY_ENV = "HIATUSSEG_VERBOSITY"
MASK_SUFFIXES = (".pgm", ".pnm", ".png")

log = logging.getLogger("hiatusseg")

MODEL_PARAMS = {"proposed": ModelParams, "cv": CvParams, "drlse": DrlseParams}


class InputError(Exception):
    pass


def _setup_logging():
    levels = {"0": logging.ERROR, "1": logging.WARNING, "2": logging.INFO, "3": logging.DEBUG}
    raw = os.environ.get(VERBOSITY_ENV, "1").strip()
    level = levels.get(raw)
    if level is None:
        level = getattr(logging, raw.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def _all_param_fields():
    names = {"n_scales"}
    for cls in MODEL_PARAMS.values():
        names.update(f.name for f in dataclasses.fields(cls))
    return sorted(names)


# --- segment --------------------------------------------------------------

def _resolve_params(args):
    cls = MODEL_PARAMS[args.model]
    values = load_config(args.config) if args.config else {}
    for name in _all_param_fields():
        flag = getattr(args, f"p_{name}")
        if flag is not None:
            values[name] = flag
    n_scales = 5
    if "n_scales" in values:
        if args.model != "proposed":
            raise ConfigError("n_scales only applies to the proposed model")
        n_scales = build_dataclass(_Scales, {"n": values.pop("n_scales")}).n
    return build_dataclass(cls, values), n_scales


@dataclasses.dataclass
class _Scales:
    n: int = 5

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n_scales must be >= 1")


def _segment_outputs(out, n_levels):
    names = ["mask.pgm", "overlay.png", "run_log.json", "manifest.json"]
    names += [f"scale_{k}_mask.pgm" for k in range(n_levels)]
    return [out / n for n in names]


def cmd_segment(args):
    path = Path(args.input)
    if not path.is_file():
        raise InputError(f"input image {path} not found")
    try:
        raw = read_image(path)
    except Exception as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if raw.ndim != 2:
        raise InputError(f"{path} is not a grayscale image")
    try:
        seed = Ellipse.parse(args.seed)
        params, n_scales = _resolve_params(args)
    except (ValueError, OSError) as exc:
        raise InputError(str(exc)) from exc

    out = Path(args.out)
    n_levels = n_scales if args.model == "proposed" else 1
    existing = [p for p in _segment_outputs(out, n_levels) if p.exists()]
    if existing and not args.force:
        raise InputError(f"refusing to overwrite {existing[0]} (use --force)")

    image = to_unit(raw)
    start = time.perf_counter()
    failed = False
    per_scale, reports = [], []
    final = None
    try:
        if args.model == "proposed":
            result = run_pipeline(image, PipelineConfig(seed=seed, n_scales=n_scales, model=params))
            final, per_scale, reports = result.final_mask, result.per_scale_masks, result.per_scale_reports
        else:
            phi0 = seed_to_levelset(seed, image.shape)
            evolve = evolve_cv if args.model == "cv" else evolve_drlse
            phi, report = evolve(image, phi0, params)
            reports = [report]
            if report.stop_reason is StopReason.DEGENERATE:
                failed = True
            else:
                final = mask_from_levelset(phi)
                per_scale = [final]
    except PipelineError as exc:
        log.error("%s", exc)
        failed = True
        per_scale, reports = exc.partial.per_scale_masks, exc.partial.per_scale_reports
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    wall = time.perf_counter() - start

    out.mkdir(parents=True, exist_ok=True)
    if final is not None:
        write_mask(out / "mask.pgm", final)
        write_overlay(out / "overlay.png", image, mask_boundary(final))
    if args.model == "proposed":
        for k, m in enumerate(per_scale):
            if m is not None:
                write_mask(out / f"scale_{k}_mask.pgm", m)
    run_log = {
        "model": args.model,
        "wall_time_s": wall,
        "status": "degenerate" if failed else "ok",
        "scales": [None if r is None else dict(level=k, **r.to_dict())
                   for k, r in enumerate(reports)],
    }
    (out / "run_log.json").write_text(json.dumps(run_log, indent=2))
    manifest = {
        "version": __version__,
        "input": str(path.resolve()),
        "model": args.model,
        "config": str(Path(args.config).resolve()) if args.config else None,
        "out": str(out.resolve()),
        "seed": {"cx": seed.cx, "cy": seed.cy, "a": seed.a, "b": seed.b},
        "n_scales": n_levels,
        "params": dataclass_values(params),
        "intensity_normalization": "min-max to [0, 1]",
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    if failed:
        return EXIT_NUMERIC
    print(f"{args.model}: wrote {out} in {wall:.2f} s")
    return EXIT_OK


# --- eval -----------------------------------------------------------------

def _mask_files(directory):
    d = Path(directory)
    if not d.is_dir():
        raise InputError(f"{d} is not a directory")
    return {p.name: p for p in sorted(d.iterdir()) if p.suffix.lower() in MASK_SUFFIXES}


def cmd_eval(args):
    auto = _mask_files(args.auto)
    manual = _mask_files(args.manual)
    if not auto or not manual:
        raise InputError("no mask files found")
    unmatched = sorted(set(auto) ^ set(manual))
    if unmatched:
        raise InputError("unmatched files: " + ", ".join(unmatched))
    names = sorted(auto)
    try:
        scores = [score(read_mask(auto[n]), read_mask(manual[n])) for n in names]
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    summary = summarize(scores, names)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    summary.write_csv(out)
    print(summary.describe())
    return EXIT_OK


# --- phantom --------------------------------------------------------------

def cmd_phantom(args):
    try:
        spec = spec_from_config(load_config(args.spec))
    except (OSError, ValueError) as exc:
        raise InputError(f"invalid phantom spec: {exc}") from exc
    if args.count < 1:
        raise InputError("--count must be >= 1")
    specs = [spec] if args.count == 1 else [
        dataclasses.replace(spec, rng_seed=spec.rng_seed + i) for i in range(args.count)]
    outputs = []
    for s in specs:
        try:
            image, mask = generate(s)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        outputs.append((s, image, mask))

    root = Path(args.out)
    for s, image, mask in outputs:
        d = root if len(outputs) == 1 else root / f"seed_{s.rng_seed:04d}"
        d.mkdir(parents=True, exist_ok=True)
        write_pgm(d / "image.pgm", to_uint8(image))
        write_mask(d / "mask.pgm", mask)
        (d / "spec.cfg").write_text(
            f"# generated by hiatusseg {__version__}; noise: {RNG_ALGORITHM}\n"
            + dump_config({k: v for k, v in spec_to_config(s).items() if k != "rng_algorithm"}))
    print(f"wrote {len(outputs)} phantom(s) to {root}")
    return EXIT_OK


# --- entry point ----------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="hiatusseg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment one image")
    seg.add_argument("--input", required=True)
    seg.add_argument("--model", choices=sorted(MODEL_PARAMS), default="proposed")
    seg.add_argument("--seed", required=True, help="initial ellipse cx,cy,a,b in pixels")
    seg.add_argument("--config", help="key = value parameter file")
    seg.add_argument("--out", required=True)
    seg.add_argument("--force", action="store_true", help="overwrite existing results")
    params = seg.add_argument_group("parameter overrides (take precedence over --config)")
    for name in _all_param_fields():
        params.add_argument(f"--{name.replace('_', '-')}", dest=f"p_{name}", metavar="V")
    seg.set_defaults(func=cmd_segment)

    ev = sub.add_parser("eval", help="score automatic masks against manual ones")
    ev.add_argument("--auto", required=True)
    ev.add_argument("--manual", required=True)
    ev.add_argument("--out", required=True, help="CSV output path")
    ev.set_defaults(func=cmd_eval)

    ph = sub.add_parser("phantom", help="generate a synthetic test image")
    ph.add_argument("--spec", required=True)
    ph.add_argument("--out", required=True)
    ph.add_argument("--count", type=int, default=1,
                    help="number of consecutive noise seeds, one subdirectory each")
    ph.set_defaults(func=cmd_phantom)
    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except FloatingPointError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
