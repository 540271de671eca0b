"""Reading and writing attribute matrices (binary ADIF and CSV) and labels.

Binary layout (little-endian throughout)::

    magic   4 bytes  b"ADIF"
    version u32      currently 1
    flags   u8       bit 0: 1 = float64 payload, 0 = float32
    N       u64      number of rows (samples)
    d       u64      number of columns (attribute dimensions)
    values  N*d*(8|4) bytes, row-major
    ids_len u64      byte length of the ids block (0 = no ids)
    ids     ids_len bytes, newline-separated UTF-8, one id per row

CSV matrices are plain comma-separated numbers with ``.`` as the decimal
separator and no header; an optional leading ``id:<sample id>`` field per
row carries sample ids. Values are written with the shortest representation
that round-trips at the stored precision, so save/load/save is
byte-identical.

Label files hold one sample per line, either ``<id>,<0|1>`` or bare
``<0|1>``; a literal ``id,label`` / ``label`` header line is tolerated.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import MatrixFormatError, ValidationError
from .matrix import AttributeMatrix

__all__ = ["load_labels", "load_matrix", "save_matrix"]

_MAGIC = b"ADIF"
_VERSION = 1
_HEADER = struct.Struct("<4sIBQQ")  # magic, version, flags, N, d
_IDS_LEN = struct.Struct("<Q")
_FLAG_F64 = 0x01


def _resolve_format(path: Path, format: str) -> str:
    if format not in ("auto", "adif", "csv"):
        raise ValidationError(f"unknown matrix format {format!r}")
    if format != "auto":
        return format
    suffix = path.suffix.lower()
    if suffix == ".adif":
        return "adif"
    if suffix == ".csv":
        return "csv"
    raise ValidationError(
        f"cannot infer format from suffix {suffix!r} of {path.name!r}; "
        "pass format='adif' or format='csv'"
    )


def _format_value(value: float, precision: str) -> str:
    # Quantize to the stored width, then emit the shortest float64
    # representation of the quantized value: parsing it recovers the exact
    # same bits, making save/load/save byte-identical at either precision.
    if precision == "f32":
        return repr(float(np.float32(value)))
    return repr(float(value))


def save_matrix(
    matrix: AttributeMatrix,
    path: str | Path,
    format: str = "auto",
    precision: str = "f64",
) -> None:
    """Write ``matrix`` to ``path`` in the given format and precision.

    ``format="auto"`` infers from the file suffix (``.adif`` / ``.csv``).
    ``precision`` selects the stored width (``"f64"`` or ``"f32"``); for CSV
    it selects which width the textual values round-trip to.
    """
    path = Path(path)
    fmt = _resolve_format(path, format)
    if precision not in ("f32", "f64"):
        raise ValidationError(f"unknown precision {precision!r}")
    ids = matrix.sample_ids
    if ids is not None:
        for s in ids:
            if "\n" in s or "," in s:
                raise ValidationError(
                    f"sample id {s!r} contains a separator character and "
                    "cannot be stored"
                )
    if fmt == "adif":
        flags = _FLAG_F64 if precision == "f64" else 0
        dtype = "<f8" if precision == "f64" else "<f4"
        payload = np.ascontiguousarray(matrix.values.astype(dtype)).tobytes()
        ids_blob = "\n".join(ids).encode("utf-8") if ids else b""
        with open(path, "wb") as fh:
            fh.write(
                _HEADER.pack(
                    _MAGIC, _VERSION, flags, matrix.n_samples, matrix.n_dims
                )
            )
            fh.write(payload)
            fh.write(_IDS_LEN.pack(len(ids_blob)))
            fh.write(ids_blob)
        return

    values = matrix.values
    if precision == "f32":
        values = values.astype(np.float32)
    lines = []
    for i in range(matrix.n_samples):
        fields = [_format_value(v, precision) for v in values[i]]
        if ids is not None:
            fields.insert(0, f"id:{ids[i]}")
        lines.append(",".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_adif(path: Path) -> AttributeMatrix:
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise MatrixFormatError(
            f"{path.name}: file too short for header "
            f"({len(blob)} bytes, need {_HEADER.size})"
        )
    magic, version, flags, n, d = _HEADER.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise MatrixFormatError(f"{path.name}: bad magic {magic!r}")
    if version != _VERSION:
        raise MatrixFormatError(
            f"{path.name}: unsupported version {version} (expected {_VERSION})"
        )
    if flags & ~_FLAG_F64:
        raise MatrixFormatError(f"{path.name}: unknown flag bits 0x{flags:02x}")
    itemsize = 8 if flags & _FLAG_F64 else 4
    payload_len = n * d * itemsize
    offset = _HEADER.size
    if len(blob) < offset + payload_len + _IDS_LEN.size:
        raise MatrixFormatError(
            f"{path.name}: truncated payload ({len(blob)} bytes for "
            f"{n}x{d} matrix)"
        )
    dtype = "<f8" if flags & _FLAG_F64 else "<f4"
    values = np.frombuffer(
        blob, dtype=dtype, count=n * d, offset=offset
    ).astype(np.float64)
    offset += payload_len
    (ids_len,) = _IDS_LEN.unpack_from(blob, offset)
    offset += _IDS_LEN.size
    if len(blob) != offset + ids_len:
        raise MatrixFormatError(
            f"{path.name}: ids block length {ids_len} does not match "
            f"remaining {len(blob) - offset} bytes"
        )
    ids: tuple[str, ...] | None = None
    if ids_len:
        try:
            text = blob[offset:].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MatrixFormatError(f"{path.name}: ids block is not UTF-8") from exc
        ids = tuple(text.split("\n"))
        if len(ids) != n:
            raise MatrixFormatError(
                f"{path.name}: {len(ids)} ids for {n} rows"
            )
    nonfinite = np.flatnonzero(~np.isfinite(values))
    if nonfinite.size:
        idx = int(nonfinite[0])
        raise MatrixFormatError(
            f"{path.name}: non-finite value at row {idx // d}, column {idx % d}"
        )
    try:
        return AttributeMatrix(values.reshape(n, d), ids)
    except ValidationError as exc:
        raise MatrixFormatError(f"{path.name}: {exc}") from exc


def _load_csv(path: Path) -> AttributeMatrix:
    text = path.read_text(encoding="utf-8")
    raw_lines = text.split("\n")
    while raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    rows: list[list[float]] = []
    ids: list[str] = []
    has_ids: bool | None = None
    n_cols: int | None = None
    for row, line in enumerate(raw_lines):
        if line == "":
            raise MatrixFormatError(f"{path.name}: blank line at row {row}")
        fields = line.split(",")
        row_has_id = fields[0].startswith("id:")
        if has_ids is None:
            has_ids = row_has_id
        elif row_has_id != has_ids:
            raise MatrixFormatError(
                f"{path.name}: row {row} "
                f"{'has' if row_has_id else 'lacks'} an id field, unlike "
                "earlier rows"
            )
        if row_has_id:
            ids.append(fields[0][3:])
            fields = fields[1:]
        if n_cols is None:
            n_cols = len(fields)
        elif len(fields) != n_cols:
            raise MatrixFormatError(
                f"{path.name}: row {row} has {len(fields)} values, "
                f"expected {n_cols}"
            )
        parsed = []
        for col, token in enumerate(fields):
            try:
                value = float(token)
            except ValueError:
                raise MatrixFormatError(
                    f"{path.name}: value {token!r} at row {row}, "
                    f"column {col} is not a number"
                ) from None
            if not np.isfinite(value):
                raise MatrixFormatError(
                    f"{path.name}: non-finite value at row {row}, column {col}"
                )
            parsed.append(value)
        rows.append(parsed)
    if not rows:
        raise MatrixFormatError(f"{path.name}: no data rows")
    try:
        return AttributeMatrix(
            np.array(rows, dtype=np.float64), tuple(ids) if has_ids else None
        )
    except ValidationError as exc:
        raise MatrixFormatError(f"{path.name}: {exc}") from exc


def load_matrix(path: str | Path, format: str = "auto") -> AttributeMatrix:
    """Load an attribute matrix from an ADIF or CSV file.

    Raises:
        MatrixFormatError: malformed header or content; messages name the
            offending row/column where applicable.
        OSError: the file cannot be read.
    """
    path = Path(path)
    fmt = _resolve_format(path, format)
    if fmt == "adif":
        return _load_adif(path)
    return _load_csv(path)


def load_labels(path: str | Path) -> tuple[NDArray[np.int64], list[str] | None]:
    """Load a binary label file.

    Returns ``(labels, ids)`` where ``ids`` is ``None`` for positional
    (id-less) files. A literal ``id,label`` or ``label`` header line is
    skipped if present.
    """
    path = Path(path)
    raw_lines = path.read_text(encoding="utf-8").split("\n")
    while raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    if raw_lines and raw_lines[0].strip().lower() in ("id,label", "label"):
        raw_lines = raw_lines[1:]
    labels: list[int] = []
    ids: list[str] = []
    has_ids: bool | None = None
    for row, line in enumerate(raw_lines):
        fields = line.split(",")
        if len(fields) == 1:
            row_has_id = False
        elif len(fields) == 2:
            row_has_id = True
        else:
            raise MatrixFormatError(
                f"{path.name}: row {row} has {len(fields)} fields, expected "
                "'id,label' or 'label'"
            )
        if has_ids is None:
            has_ids = row_has_id
        elif row_has_id != has_ids:
            raise MatrixFormatError(
                f"{path.name}: row {row} mixes id and id-less label lines"
            )
        token = fields[-1].strip()
        if token not in ("0", "1"):
            raise MatrixFormatError(
                f"{path.name}: label {token!r} at row {row} is not 0 or 1"
            )
        if row_has_id:
            ids.append(fields[0].strip())
        labels.append(int(token))
    if not labels:
        raise MatrixFormatError(f"{path.name}: no label rows")
    return np.array(labels, dtype=np.int64), (ids if has_ids else None)
