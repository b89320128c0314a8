# prosody_main.py

import argparse
import logging
import os
import sys
from typing import List, Optional

from adaptor_module.models import AdaptorError
from alignment_module.models import AlignmentError
from cli_module.commands import (
    cmd_eval,
    cmd_extract,
    cmd_manifest,
    cmd_mix,
    cmd_plot,
    cmd_predict,
    cmd_synth_corpus,
    cmd_train,
)
from cli_module.config import add_config_flags, build_config
from cli_module.models import ConfigError, ExitCode, ManifestError
from metrics_module.models import MetricError
from mixer_module.models import MixerError
from signal_features_module.models import FeatureExtractionError

logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None) -> None:
    level_name = (level or os.getenv("PROSODY_LOG_LEVEL", "INFO")).upper()
    root_logger = logging.getLogger()
    root_logger.setLevel(level_name)
    if not any(getattr(h, "_prosody", False) for h in root_logger.handlers):
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
        console_handler._prosody = True
        root_logger.addHandler(console_handler)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    add_config_flags(common)

    parser = argparse.ArgumentParser(
        prog="prosody",
        description="Emotion-intensity prosody pipeline: extract, mix, train, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="Frame tracks and phoneme features per utterance")
    p.add_argument("manifest")

    p = sub.add_parser("mix", parents=[common], help="Generate intermediate-intensity pseudo-labels")
    p.add_argument("manifest", help="Manifest written by extract")

    p = sub.add_parser("train", parents=[common], help="Train the variance adaptor")
    p.add_argument("manifest", help="Manifest written by extract")
    p.add_argument("pseudo_labels", help="JSON lines written by mix")
    p.add_argument("--no-discriminator", action="store_true", help="Ablation without adversarial terms")

    p = sub.add_parser("eval", parents=[common], help="MCD, F0 RMSE and mel MAE between two manifests")
    p.add_argument("reference")
    p.add_argument("candidate")

    p = sub.add_parser("plot", parents=[common], help="Export pitch contours as CSV")
    p.add_argument("inputs", nargs="+", help="F0 tracks (.imx), prosody text (.txt) or phoneme features (.tsv)")
    p.add_argument("--labels", nargs="+", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("manifest", parents=[common], help="Build a manifest from a speaker/Emotion/*.wav tree")
    p.add_argument("root")
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", parents=[common], help="Predict prosody over an intensity grid")
    p.add_argument("checkpoint")
    p.add_argument("manifest")

    p = sub.add_parser("toy-corpus", parents=[common], help="Write the synthetic parallel corpus")
    p.add_argument("out")
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        extra = {"adaptor.use_discriminator": False} if getattr(args, "no_discriminator", False) else None
        cfg = build_config(args, extra)
        if args.command == "extract":
            return cmd_extract(args.manifest, cfg)
        if args.command == "mix":
            return cmd_mix(args.manifest, cfg)
        if args.command == "train":
            return cmd_train(args.manifest, args.pseudo_labels, cfg)
        if args.command == "eval":
            return cmd_eval(args.reference, args.candidate, cfg)
        if args.command == "plot":
            return cmd_plot(args.inputs, args.labels, args.out, cfg)
        if args.command == "manifest":
            return cmd_manifest(args.root, args.out)
        if args.command == "predict":
            return cmd_predict(args.checkpoint, args.manifest, cfg)
        if args.command == "toy-corpus":
            return cmd_synth_corpus(args.out, cfg)
    except (ConfigError, ManifestError) as e:
        logger.error(f"Configuration error: {e}")
        return ExitCode.CONFIG
    except (MixerError, AdaptorError, MetricError, FeatureExtractionError, AlignmentError) as e:
        logger.error(f"{args.command} failed: {e}")
        return ExitCode.FAILED
    raise AssertionError(f"unhandled command {args.command}")


def main() -> None:
    sys.exit(int(run()))


if __name__ == "__main__":
    main()
