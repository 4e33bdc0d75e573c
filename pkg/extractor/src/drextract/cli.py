"""Command line: one extraction run per invocation.

Exit codes: 0 success, 2 config error, 3 data error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, DataError, ExtractError, WriteError
from .extract import ExtractSpec, extract
from .models import MODEL_NAMES, model_info


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drextract",
        description=(
            "Export penultimate-layer ConvNet activations for a directory of "
            "images to an FVEC file (plus a .json sidecar)."
        ),
    )
    parser.add_argument("--model", required=True, choices=MODEL_NAMES)
    parser.add_argument("--images", type=Path, required=True, help="image directory")
    parser.add_argument(
        "--labels", type=Path, required=True,
        help="two-column CSV: image id (filename stem), grade 0-4",
    )
    parser.add_argument("--out", type=Path, required=True, help="FVEC output path")
    parser.add_argument(
        "--weights", default="imagenet", choices=["imagenet", "none"],
        help="'none' builds a seeded random-weight architecture (offline smoke runs)",
    )
    parser.add_argument("--batch-size", type=int, default=16)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = ExtractSpec(
        model_name=args.model,
        image_dir=args.images,
        labels_csv=args.labels,
        output=args.out,
        weights=None if args.weights == "none" else args.weights,
        batch_size=args.batch_size,
    )
    try:
        path = extract(spec)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (WriteError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ExtractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    info = model_info(args.model)
    print(f"{args.model}: wrote dim-{info.dim} features to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
