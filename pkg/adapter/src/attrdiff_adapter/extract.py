"""Folder-of-images to ADIF extraction.

Every successfully decoded image contributes exactly one matrix row, in the
order of its path sorted relative to the image root, and its row id is that
relative path (POSIX separators).  Unreadable images are skipped and listed
in a sidecar log next to the output file; they are never silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .adif_writer import write_adif
from .encoders import load_encoder
from .errors import ExtractError, ValidationError

__all__ = ["IMAGE_EXTENSIONS", "ExtractJob", "ExtractResult", "extract"]

IMAGE_EXTENSIONS = frozenset(
    {".bmp", ".gif", ".jpeg", ".jpg", ".png", ".tif", ".tiff", ".webp"}
)


@dataclass(frozen=True)
class ExtractJob:
    """One extraction run.

    Attributes:
        image_dir: Root directory scanned recursively for image files.
        encoder: Encoder spec, ``NAME`` or ``NAME:CHECKPOINT``.
        out_path: Destination ``.adif`` file.
        batch_size: Images decoded and encoded per call; affects memory only,
            never the output bytes.
        device: Placement hint handed to the encoder loader.
        precision: Payload encoding of the output file, ``"f64"`` or ``"f32"``.
    """

    image_dir: str | Path
    encoder: str
    out_path: str | Path
    batch_size: int = 32
    device: str = "cpu"
    precision: str = "f64"

    def __post_init__(self) -> None:
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            raise ValidationError(f"batch_size must be a positive int, got {self.batch_size!r}")
        if self.precision not in ("f64", "f32"):
            raise ValidationError(f"precision must be 'f64' or 'f32', got {self.precision!r}")
        if not isinstance(self.device, str) or not self.device:
            raise ValidationError("device must be a non-empty string")
        if not str(self.encoder).strip():
            raise ValidationError("encoder spec must be non-empty")


@dataclass(frozen=True)
class ExtractResult:
    """What an extraction run produced.

    ``skipped`` holds ``(relative_path, reason)`` pairs in row-scan order;
    ``log_path`` is the sidecar file they were written to, or None when every
    image encoded cleanly.
    """

    out_path: Path
    n_encoded: int
    width: int
    ids: tuple[str, ...]
    skipped: tuple[tuple[str, str], ...] = field(default=())
    log_path: Path | None = None


def _list_images(root: Path) -> list[str]:
    """Relative POSIX paths of all image files under ``root``, sorted."""
    found = [
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    ]
    return sorted(found)


def _decode(path: Path) -> Image.Image:
    """Fully load one image so that later encoding cannot hit lazy I/O errors."""
    with Image.open(path) as img:
        img.load()
        return img.copy()


def extract(job: ExtractJob) -> ExtractResult:
    """Run ``job`` and write its output file (plus sidecar log on failures).

    Raises:
        ExtractError: Missing image directory, no image files, no decodable
            image files, or an encoder that breaks its batch contract.
        EncoderLoadError: The encoder spec cannot be resolved or loaded.
        ValidationError: Malformed job fields (raised at construction).
        OSError: The output file cannot be written.
    """
    root = Path(job.image_dir)
    if not root.is_dir():
        raise ExtractError(f"image directory {root} does not exist")
    rel_paths = _list_images(root)
    if not rel_paths:
        raise ExtractError(f"no image files under {root}")

    encoder = load_encoder(str(job.encoder), device=job.device)

    kept_ids: list[str] = []
    skipped: list[tuple[str, str]] = []
    blocks: list[np.ndarray] = []
    batch_imgs: list[Image.Image] = []

    def flush() -> None:
        if not batch_imgs:
            return
        rows = np.asarray(encoder.encode_batch(batch_imgs), dtype=np.float64)
        if rows.shape != (len(batch_imgs), encoder.width):
            raise ExtractError(
                f"encoder {encoder.name!r} returned shape {rows.shape}, "
                f"expected {(len(batch_imgs), encoder.width)}"
            )
        if not np.isfinite(rows).all():
            raise ExtractError(f"encoder {encoder.name!r} produced non-finite values")
        blocks.append(rows)
        batch_imgs.clear()

    for rel in rel_paths:
        try:
            img = _decode(root / rel)
        except (UnidentifiedImageError, OSError, ValueError) as exc:
            skipped.append((rel, f"{type(exc).__name__}: {exc}"))
            continue
        kept_ids.append(rel)
        batch_imgs.append(img)
        if len(batch_imgs) >= job.batch_size:
            flush()
    flush()

    if not kept_ids:
        raise ExtractError(
            f"none of the {len(rel_paths)} image files under {root} could be decoded"
        )

    out = write_adif(
        np.vstack(blocks), job.out_path, ids=kept_ids, precision=job.precision
    )

    # The sidecar log reflects *this* run: write it only when something was
    # skipped, and clear any stale one from a previous run otherwise.
    log_path = Path(str(out) + ".log")
    if skipped:
        lines = [f"SKIP {rel}\t{reason}" for rel, reason in skipped]
        log_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    else:
        log_path.unlink(missing_ok=True)

    return ExtractResult(
        out_path=out,
        n_encoded=len(kept_ids),
        width=encoder.width,
        ids=tuple(kept_ids),
        skipped=tuple(skipped),
        log_path=log_path if skipped else None,
    )
