# SPDX-FileCopyrightText: 2025 mwcnn-restore contributors
# SPDX-FileType: SOURCE
# SPDX-License-Identifier: Apache-2.0

"""Utilities for CLI."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from importlib.metadata import PackageNotFoundError, version
from typing import TYPE_CHECKING, Any, Callable

from .ablation import run_ablation, run_level_sweep
from .checkpoint import checkpoint_load, checkpoint_save, restore_model
from .config import MwcnnConfig, TrainConfig, load_config, preset_config
from .constants import (
    DEFAULT_ABLATION_VARIANTS,
    DEFAULT_ABLATION_PRESET,
    DEFAULT_BANK,
    DEFAULT_PRESET,
    MAX_LEVELS,
    NOISE_LEVELS,
    OUTPUT_CHOICES_DESC,
    SELFCHECK_CASES,
    SUPPORTED_ABLATION_VARIANTS,
    SUPPORTED_ABLATION_VARIANTS_DESC,
    SUPPORTED_BANKS,
    SUPPORTED_BANKS_DESC,
    SUPPORTED_DOWNSAMPLERS_DESC,
    SUPPORTED_PRESETS,
    SUPPORTED_PRESETS_DESC,
)
from .corpus import Corpus, load_corpus, split_corpus, synthetic_corpus
from .model import ModelGraph, build, dilated_chain_variant
from .pnm import ImageU8, read_pnm, write_pnm
from .receptive_field import mask_summary, mask_to_image, receptive_field_mask
from .report import ablation_table_text, eval_table_text
from .restore import denoise_image, evaluate_directory
from .selfcheck import SelfCheckSuite, check_names
from .subbands import decompose, reconstruct
from .tensor import new_rng
from .train import Trainer

if TYPE_CHECKING:
    from .ablation import AblationResult

DEFAULT_SYNTHETIC_SIZE = 96

PROG = "mwcnn"


def get_version() -> str:
    """Installed package version, or "unknown" when run from a source tree."""
    try:
        return version("mwcnn-restore")
    except PackageNotFoundError:
        return "unknown"


def _choices_text(title: str, desc: dict[str, str]) -> str:
    return f"  {title}:\n" + "\n".join(
        f"    {k:<14} {v}" for k, v in sorted(desc.items())
    )


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument(
        "--corpus", metavar="DIR", help="Directory of clean PNM training images"
    )
    group.add_argument(
        "--synthetic",
        metavar="N",
        type=int,
        help="Train on N generated piecewise-smooth images instead",
    )
    parser.add_argument(
        "--synthetic-size",
        metavar="PX",
        type=int,
        default=DEFAULT_SYNTHETIC_SIZE,
        help=f"Side of generated images [default: {DEFAULT_SYNTHETIC_SIZE}]",
    )


def _add_config_args(parser: argparse.ArgumentParser, default_preset: str) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--config", metavar="PATH", help="key=value configuration file")
    group.add_argument(
        "--preset",
        choices=sorted(SUPPORTED_PRESETS),
        default=default_preset,
        help=(
            f"Named configuration, listed in {PROG} -h "
            f"[default: {default_preset}]"
        ),
    )


def _build_parser() -> argparse.ArgumentParser:
    epilog_text = (
        "choices:\n"
        + _choices_text("Wavelet banks (for --bank)", SUPPORTED_BANKS_DESC)
        + "\n\n"
        + _choices_text("Downsamplers (config key downsampler)", SUPPORTED_DOWNSAMPLERS_DESC)
        + "\n\n"
        + _choices_text("Ablation variants (for --variants)", SUPPORTED_ABLATION_VARIANTS_DESC)
        + "\n\n"
        + _choices_text("Presets (for --preset)", SUPPORTED_PRESETS_DESC)
        + "\n\n"
        + _choices_text("Report output types (for --output)", OUTPUT_CHOICES_DESC)
        + "\n\n"
        "Examples:\n"
        f"  {PROG} train --synthetic 24 -o model.ckpt --log train.log\n"
        f"  {PROG} train --preset desk --synthetic 24 -o desk.ckpt\n"
        f"  {PROG} denoise --checkpoint model.ckpt noisy.pgm -o restored.pgm\n"
        f"  {PROG} eval --checkpoint model.ckpt --clean-dir set12 --sigma 25\n"
        f"  {PROG} wavelet decompose img.pgm --levels 2 -o bands/\n"
        f"  {PROG} rfmask --dilated-chain 3 -o mask.pgm\n"
        f"  {PROG} selfcheck --output json\n"
        f"  {PROG} ablate --synthetic 24\n"
    )

    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Multi-level wavelet CNN for image restoration.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=epilog_text,
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Print more information (debug)",
    )
    parser.add_argument(
        "-V",
        "--version",
        action="store_true",
        help=f"Display version of {PROG}",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("train", help="Train a denoising model")
    _add_config_args(p, DEFAULT_PRESET)
    _add_corpus_args(p)
    p.add_argument(
        "-o", "--output", metavar="PATH", required=True, help="Checkpoint to write"
    )
    p.add_argument("--log", metavar="PATH", help="Training log to write")
    p.add_argument("--resume", metavar="CKPT", help="Continue from a checkpoint")

    p = sub.add_parser("denoise", help="Restore one image")
    p.add_argument("--checkpoint", metavar="PATH", required=True)
    p.add_argument("input", metavar="PATH", help="Noisy PNM image")
    p.add_argument("-o", "--output", metavar="PATH", required=True)

    p = sub.add_parser(
        "eval",
        help="PSNR/SSIM table over a directory",
        description=(
            "Adds noise to every clean image, restores it and scores it.\n"
            "The table has one tab-separated \"file psnr_db ssim\" line per image,\n"
            "framed by a \"# border crop\" header comment and a \"# mean\" footer."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--checkpoint", metavar="PATH", required=True)
    p.add_argument("--clean-dir", metavar="DIR", required=True)
    p.add_argument(
        "--sigma",
        type=float,
        help=(
            "Noise level on the 0-255 scale, usually one of "
            f"{', '.join(str(s) for s in NOISE_LEVELS)} [default: the training sigma]"
        ),
    )
    p.add_argument("--seed", type=int, default=0, help="Noise seed [default: 0]")
    p.add_argument(
        "-o", "--output-file", metavar="PATH", help="Table file; prints if omitted"
    )

    p = sub.add_parser("wavelet", help="Wavelet packet dumps")
    wsub = p.add_subparsers(dest="action", metavar="ACTION", required=True)
    d = wsub.add_parser(
        "decompose",
        help="Image -> subband PGMs",
        description=(
            "Each subband is quantized to 16 bits and written as two 8-bit PGMs:\n"
            "band_<path>.pgm holds the high byte and band_<path>.lo.pgm the low byte.\n"
            "The high-byte file alone is only a preview; rebuilding the image needs\n"
            "both files and the subbands.txt sidecar."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    d.add_argument("input", metavar="PATH")
    d.add_argument(
        "--bank",
        choices=sorted(SUPPORTED_BANKS),
        default=DEFAULT_BANK,
        help=f"Wavelet bank [default: {DEFAULT_BANK}]",
    )
    d.add_argument(
        "--levels",
        type=int,
        choices=range(1, MAX_LEVELS + 1),
        default=1,
        help="Decomposition depth [default: 1]",
    )
    d.add_argument("-o", "--output", metavar="DIR", required=True)
    r = wsub.add_parser("reconstruct", help="Subband PGMs -> image")
    r.add_argument("input", metavar="DIR")
    r.add_argument("-o", "--output", metavar="PATH", required=True)

    p = sub.add_parser("rfmask", help="Receptive-field mask of one output pixel")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--config", metavar="PATH", help="Model configuration file")
    group.add_argument(
        "--dilated-chain",
        metavar="DEPTH",
        type=int,
        help="Use a chain of DEPTH dilation-2 convs instead",
    )
    p.add_argument(
        "--size", nargs=2, type=int, metavar=("H", "W"), default=[32, 32]
    )
    p.add_argument(
        "--pixel",
        nargs=2,
        type=int,
        metavar=("ROW", "COL"),
        help="Output pixel [default: image center]",
    )
    p.add_argument("-o", "--output", metavar="PATH", help="Mask PGM to write")

    p = sub.add_parser("selfcheck", help="Run the oracle suite")
    p.add_argument(
        "--cases",
        type=int,
        default=SELFCHECK_CASES,
        help=f"Random cases per check [default: {SELFCHECK_CASES}]",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", nargs="+", choices=check_names(), metavar="CHECK")
    p.add_argument(
        "-r",
        "--output",
        choices=sorted(OUTPUT_CHOICES_DESC),
        default="print",
        help="Report output type; see below for details [default: print]",
    )
    p.add_argument(
        "--output-file",
        metavar="PATH",
        help="Filepath for JSON output; if omitted, prints to console",
    )

    p = sub.add_parser("ablate", help="Train variants under one budget")
    p.add_argument(
        "--variants",
        nargs="+",
        choices=sorted(SUPPORTED_ABLATION_VARIANTS),
        default=list(DEFAULT_ABLATION_VARIANTS),
        metavar="VARIANT",
    )
    p.add_argument(
        "--levels",
        nargs="+",
        type=int,
        choices=range(1, MAX_LEVELS + 1),
        metavar="L",
        help="Sweep the wavelet network over these level counts instead",
    )
    _add_config_args(p, DEFAULT_ABLATION_PRESET)
    _add_corpus_args(p)
    p.add_argument(
        "-o", "--output-file", metavar="PATH", help="Table file; prints if omitted"
    )
    return parser


def get_parsed_args(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = _build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        if args.version:
            print(get_version())
            sys.exit(0)
        parser.print_help()
        sys.exit(0)

    return args


def _write_or_print(text: str, output_file: str | None) -> None:
    if output_file:
        with open(output_file, "w", encoding="utf-8") as outfile:
            outfile.write(text)
    else:
        print(text, end="")


def _configs(
    path: str | None, preset: str = DEFAULT_PRESET
) -> tuple[MwcnnConfig, TrainConfig]:
    return load_config(path) if path else preset_config(preset)


def _corpus(args: argparse.Namespace, train_cfg: TrainConfig) -> tuple[Corpus, Corpus]:
    if args.corpus:
        corpus = load_corpus(args.corpus)
    elif args.synthetic:
        corpus = synthetic_corpus(
            args.synthetic, args.synthetic_size, new_rng(train_cfg.seed + 3)
        )
    else:
        raise ValueError("Either --corpus or --synthetic is required")
    return split_corpus(corpus, train_cfg.val_count)


def run_train(args: argparse.Namespace) -> int:
    """``train``: fit a model and write its checkpoint."""
    if args.resume:
        if args.config:
            logging.warning("--config is ignored when resuming; using the checkpoint's")
        ckpt = checkpoint_load(args.resume)
        g = restore_model(ckpt)
        corpus, val = _corpus(args, ckpt.train_cfg)
        trainer = Trainer.from_checkpoint(g, ckpt, corpus, val)
        logging.info("Resuming at epoch %d of %d", ckpt.epoch, ckpt.train_cfg.epochs)
    else:
        model_cfg, train_cfg = _configs(args.config, args.preset)
        g = build(model_cfg, new_rng(train_cfg.seed))
        corpus, val = _corpus(args, train_cfg)
        trainer = Trainer(g, corpus, train_cfg, val)
    log = trainer.run()
    checkpoint_save(trainer.checkpoint(), args.output)
    if args.log:
        log.write(args.log)
    logging.info(
        "Saved %s: val PSNR %.2f dB (noisy input %.2f dB)",
        args.output,
        log.final_val_psnr,
        log.noisy_psnr,
    )
    return 0


def _load_model(path: str) -> tuple[ModelGraph, TrainConfig]:
    ckpt = checkpoint_load(path)
    return restore_model(ckpt), ckpt.train_cfg


def run_denoise(args: argparse.Namespace) -> int:
    """``denoise``: restore one image with a trained model."""
    g, _ = _load_model(args.checkpoint)
    write_pnm(denoise_image(g, read_pnm(args.input)), args.output)
    logging.debug("Wrote %s", args.output)
    return 0


def run_eval(args: argparse.Namespace) -> int:
    """``eval``: noise, restore and score every clean image of a directory."""
    g, train_cfg = _load_model(args.checkpoint)
    sigma = args.sigma if args.sigma is not None else train_cfg.sigma
    rows = evaluate_directory(g, args.clean_dir, sigma, seed=args.seed)
    table = eval_table_text([(r.name, r.psnr, r.ssim) for r in rows], g.divisor)
    _write_or_print(table, args.output_file)
    return 0


def run_wavelet(args: argparse.Namespace) -> int:
    """``wavelet decompose|reconstruct``."""
    if args.action == "decompose":
        decompose(read_pnm(args.input, gray=True), args.bank, args.levels, args.output)
    else:
        write_pnm(reconstruct(args.input), args.output)
    return 0


def run_rfmask(args: argparse.Namespace) -> int:
    """``rfmask``: receptive field of one output pixel."""
    if args.dilated_chain is not None:
        g = dilated_chain_variant(args.dilated_chain, width=1)
    else:
        g = build(_configs(args.config)[0])
    h, w = args.size
    row, col = args.pixel if args.pixel else (h // 2, w // 2)
    pixel = (row, col)
    mask = receptive_field_mask(g, pixel, size=(h, w))
    summary = mask_summary(mask)
    top, left, bottom, right = summary.bbox
    eh, ew = summary.extent
    print(
        f"pixel {pixel[0]} {pixel[1]}: bbox ({top}, {left})-({bottom}, {right}), "
        f"extent {eh}x{ew}, support {summary.support}, holes {summary.holes}"
    )
    if args.output:
        write_pnm(ImageU8(mask_to_image(mask)), args.output)
    return 0


def print_output(
    suite: SelfCheckSuite, *, output_type: str, output_file: str | None, verbose: bool
) -> None:
    """Print or save the self-check report."""
    match output_type:
        case "print":
            suite.print_table_output(verbose=verbose)

        case "json":
            result_dict: dict[str, Any] = suite.output_json()
            if output_file:
                with open(output_file, "w", encoding="utf-8") as outfile:
                    json.dump(result_dict, outfile)
            else:
                print(json.dumps(result_dict, indent=2))

    # do nothing if output_type is "quiet" or unrecognized


def run_selfcheck(args: argparse.Namespace) -> int:
    """``selfcheck``: exit 1 unless every check passes."""
    suite = SelfCheckSuite(cases=args.cases, seed=args.seed, only=args.only)
    print_output(
        suite,
        output_type=args.output,
        output_file=args.output_file,
        verbose=args.verbose,
    )
    if not suite.passed:
        for r in suite.results:
            if not r.passed:
                logging.error("%s failed: %s", r.name, r.detail)
    return 0 if suite.passed else 1


def run_ablate(args: argparse.Namespace) -> int:
    """``ablate``: train variants under one budget and compare them."""
    model_cfg, train_cfg = _configs(args.config, args.preset)
    corpus, val = _corpus(args, train_cfg)
    if not val:
        raise ValueError("Ablation needs validation images (val_count >= 1)")
    results: list[AblationResult]
    if args.levels:
        train_cfg.check_model(replace(model_cfg, levels=max(args.levels), widths=None))
        results = run_level_sweep(args.levels, model_cfg, train_cfg, corpus, val)
    else:
        results = run_ablation(args.variants, model_cfg, train_cfg, corpus, val)
    _write_or_print(ablation_table_text(results), args.output_file)
    behind = [r.variant for r in results if not r.gain > 0]
    if behind:
        logging.error("No gain over the noisy input: %s", ", ".join(behind))
        return 1
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "train": run_train,
    "denoise": run_denoise,
    "eval": run_eval,
    "wavelet": run_wavelet,
    "rfmask": run_rfmask,
    "selfcheck": run_selfcheck,
    "ablate": run_ablate,
}
