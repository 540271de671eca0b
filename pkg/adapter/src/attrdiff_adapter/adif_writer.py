"""Standalone writer for the ADIF attribute-matrix container.

This module deliberately reimplements the byte format instead of importing
the analysis library: the adapter's only contract with downstream tooling is
the file itself.  Layout, little-endian throughout:

    offset 0   magic           4 bytes, ``b"ADIF"``
    offset 4   format version  u32, currently 1
    offset 8   flags           u8, bit 0 set -> float64 payload, clear -> float32
    offset 9   rows N          u64
    offset 17  columns d       u64
    offset 25  payload         N*d values, row major, ``<f8`` or ``<f4``
    then       ids byte length u64 (0 when the file carries no row ids)
    then       ids             UTF-8, rows joined by ``\\n``, no trailing newline
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ValidationError

__all__ = ["write_adif"]

_MAGIC = b"ADIF"
_VERSION = 1
_FLAG_F64 = 0x01
_HEADER = struct.Struct("<4sIBQQ")
_IDS_LEN = struct.Struct("<Q")


def write_adif(
    values: np.ndarray,
    path: str | Path,
    *,
    ids: Sequence[str] | None = None,
    precision: str = "f64",
) -> Path:
    """Serialize ``values`` (and optional row ids) to ``path``.

    Args:
        values: Matrix of shape ``(N, d)`` with finite entries, ``N, d >= 1``.
        path: Destination file; the parent directory must already exist.
        ids: Optional row identifiers, one per row.  Each id must be a
            non-empty string without newlines (newlines delimit the id block).
        precision: ``"f64"`` or ``"f32"`` payload encoding.

    Returns:
        The destination as a ``Path``.

    Raises:
        ValidationError: If the matrix, ids, or precision are unusable.
        OSError: If the file cannot be written.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    n, d = arr.shape
    if n < 1 or d < 1:
        raise ValidationError(f"matrix must be at least 1x1, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValidationError("matrix contains non-finite values")
    if precision not in ("f64", "f32"):
        raise ValidationError(f"precision must be 'f64' or 'f32', got {precision!r}")

    ids_blob = b""
    if ids is not None:
        ids = list(ids)
        if len(ids) != n:
            raise ValidationError(f"got {len(ids)} ids for {n} rows")
        for row_id in ids:
            if not isinstance(row_id, str) or not row_id:
                raise ValidationError("row ids must be non-empty strings")
            if "\n" in row_id:
                raise ValidationError(f"row id {row_id!r} contains a newline")
        if len(set(ids)) != n:
            raise ValidationError("row ids must be unique")
        ids_blob = "\n".join(ids).encode("utf-8")

    flags = _FLAG_F64 if precision == "f64" else 0
    payload = np.ascontiguousarray(
        arr.astype("<f8" if precision == "f64" else "<f4")
    ).tobytes()

    out = Path(path)
    with open(out, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, flags, n, d))
        fh.write(payload)
        fh.write(_IDS_LEN.pack(len(ids_blob)))
        fh.write(ids_blob)
    return out
