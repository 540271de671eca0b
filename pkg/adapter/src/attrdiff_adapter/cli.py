"""Command line entry point: extract a folder of images to an ADIF file."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import __version__
from .encoders import available_encoders
from .errors import AdapterError, ValidationError
from .extract import ExtractJob, extract

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attrdiff-extract",
        description="Encode every image under a directory into one ADIF attribute matrix.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--images", required=True, metavar="DIR",
                        help="root directory scanned recursively for images")
    parser.add_argument("--encoder", required=True, metavar="SPEC",
                        help="encoder spec, NAME or NAME:CHECKPOINT "
                             f"(available: {', '.join(available_encoders())})")
    parser.add_argument("--out", required=True, metavar="FILE.adif",
                        help="output file; failures are listed in FILE.adif.log")
    parser.add_argument("--batch-size", type=int, default=32, metavar="N",
                        help="images encoded per batch (default: 32)")
    parser.add_argument("--precision", choices=("f64", "f32"), default="f64",
                        help="payload encoding of the output (default: f64)")
    parser.add_argument("--device", default="cpu", metavar="HINT",
                        help="placement hint passed to the encoder loader (default: cpu)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Exit codes: 0 success, 2 bad arguments, 1 runtime failure."""
    args = _build_parser().parse_args(argv)
    try:
        job = ExtractJob(
            image_dir=args.images,
            encoder=args.encoder,
            out_path=args.out,
            batch_size=args.batch_size,
            device=args.device,
            precision=args.precision,
        )
        result = extract(job)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AdapterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"encoded {result.n_encoded} images (d={result.width}) -> {result.out_path}")
    if result.skipped:
        print(f"skipped {len(result.skipped)} unreadable files, see {result.log_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
