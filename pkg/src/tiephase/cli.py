"""Command-line front end: generate, retrieve, train, evaluate, render.

Every subcommand exits 0 on success. On failure a single machine-readable
line {"error": <type>, "message": <text>} goes to stderr and the exit code
is nonzero.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import pipeline, tie
from .io import load_field, save_field
from .optics import OpticsConfig
from .pipeline import ExperimentConfig


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiephase",
        description="Simulate defocused micrographs, retrieve phases and train the adjustment network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="simulate a dataset of phase map pairs")
    gen.add_argument("--config", help="experiment config JSON; defaults apply if omitted")
    gen.add_argument("--out", required=True, help="dataset output directory")
    gen.add_argument("--count", type=int, help="override the number of training pairs")
    gen.add_argument("--seed", type=int, help="override the master seed")
    gen.add_argument("--noise", type=float, help="override the shot-noise level")
    gen.add_argument("--defocus-um", type=float, help="override the defocus distance in micrometres")
    gen.add_argument("--resolution", type=int, help="override the grid size")
    gen.add_argument("--save-micrographs", action="store_true",
                     help="also store the under/in/over focus intensities")

    ret = sub.add_parser("retrieve", help="retrieve a phase map from three micrographs")
    ret.add_argument("--under", required=True, help="under-focus intensity (PHF1)")
    ret.add_argument("--infocus", required=True, help="in-focus intensity (PHF1)")
    ret.add_argument("--over", required=True, help="over-focus intensity (PHF1)")
    ret.add_argument("--defocus-um", type=float, required=True,
                     help="defocus distance in micrometres")
    ret.add_argument("--out", required=True, help="retrieved phase output (PHF1)")

    tr = sub.add_parser("train", help="train the adjustment network on a dataset")
    tr.add_argument("--dataset", required=True, help="dataset directory or manifest path")
    tr.add_argument("--out", required=True, help="checkpoint output path (ANN1)")
    tr.add_argument("--lr", type=float, help="override the learning rate")
    tr.add_argument("--epochs", type=int, help="override the epoch count")
    tr.add_argument("--batch-size", type=int, help="override the batch size")
    tr.add_argument("--hidden", type=int, help="override the hidden layer size")

    ev = sub.add_parser("evaluate", help="score retrieved and adjusted phases on the test split")
    ev.add_argument("--dataset", required=True, help="dataset directory or manifest path")
    ev.add_argument("--model", required=True, help="checkpoint path (ANN1)")
    ev.add_argument("--offset-correct", action="store_true",
                    help="offset-correct retrieved phases before scoring and adjusting")
    ev.add_argument("--report", help="write the evaluation report JSON here")

    ren = sub.add_parser("render", help="render a real field to an 8-bit PGM image")
    ren.add_argument("--in", dest="in_path", required=True, help="input field (PHF1)")
    ren.add_argument("--out", required=True, help="output image path (PGM)")
    ren.add_argument("--min", type=float, default=-3.0, help="value mapped to black")
    ren.add_argument("--max", type=float, default=3.0, help="value mapped to white")
    return parser


def _cmd_generate(args) -> int:
    if args.config is not None:
        config = ExperimentConfig.from_json(Path(args.config).read_text(encoding="ascii"))
    else:
        config = ExperimentConfig()
    replacements = {}
    if args.count is not None:
        replacements["train_pairs"] = args.count
    if args.seed is not None:
        replacements["master_seed"] = args.seed
    if args.resolution is not None:
        replacements["resolution"] = args.resolution
    if args.save_micrographs:
        replacements["save_micrographs"] = True
    optics_overrides = {}
    if args.noise is not None:
        optics_overrides["noise_level"] = args.noise
    if args.defocus_um is not None:
        optics_overrides["defocus"] = 1000.0 * args.defocus_um
    if optics_overrides:
        replacements["optics"] = dataclasses.replace(config.optics, **optics_overrides)
    if replacements:
        config = dataclasses.replace(config, **replacements)
    pipeline.generate_dataset(config, args.out)
    print(f"dataset written to {args.out}")
    return 0


def _cmd_retrieve(args) -> int:
    i_minus = load_field(args.under)
    i_zero = load_field(args.infocus)
    i_plus = load_field(args.over)
    # The beam is assumed to run at 300 kV with unit incident intensity.
    optics = OpticsConfig(defocus=1000.0 * args.defocus_um, noise_level=0.0)
    config = tie.TieConfig.defaults(optics.incident_intensity, i_zero.m, i_zero.a)
    phase = tie.retrieve_phase(i_minus, i_zero, i_plus, optics, config)
    save_field(args.out, phase)
    print(f"retrieved phase written to {args.out}")
    return 0


def _cmd_train(args) -> int:
    _, history = pipeline.run_training(
        args.dataset, args.out,
        learning_rate=args.lr, epochs=args.epochs,
        batch_size=args.batch_size, hidden=args.hidden,
    )
    print(f"checkpoint written to {args.out} (final epoch loss {history[-1]:.6g})")
    return 0


def _cmd_evaluate(args) -> int:
    offset = True if args.offset_correct else None
    report = pipeline.run_evaluation(args.dataset, args.model,
                                     offset_correct=offset, report_path=args.report)
    print(f"mean retrieved error {report['mean_retrieved_error']:.6g}, "
          f"mean adjusted error {report['mean_adjusted_error']:.6g}")
    return 0


def _cmd_render(args) -> int:
    pipeline.render(args.in_path, args.out, lo=args.min, hi=args.max)
    print(f"image written to {args.out}")
    return 0


_HANDLERS = {
    "generate": _cmd_generate,
    "retrieve": _cmd_retrieve,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except Exception as exc:  # surface everything as one parseable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
