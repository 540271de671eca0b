"""Pluggable image encoders.

An encoder is loaded once per job and then applied to batches of decoded
images.  The plug-in surface is intentionally two functions:

* a *loader*, registered by name, called as ``loader(checkpoint, device)``
  and returning an :class:`Encoder` handle, and
* the handle's ``encode_batch``, mapping a list of PIL images to a
  ``(len(batch), width)`` float64 array.

Encoder specs on the command line are ``NAME`` or ``NAME:CHECKPOINT``, e.g.
``stub`` or ``linear:weights.npy``.  Loader failures are fatal for the whole
job -- a half-loaded encoder must never silently degrade the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np
from PIL import Image

from .errors import EncoderLoadError

__all__ = ["Encoder", "load_encoder", "parse_encoder_spec", "available_encoders"]

# Side length of the stub encoder's downsampled grayscale thumbnail.
_STUB_SIDE = 8


@dataclass(frozen=True)
class Encoder:
    """A ready-to-use encoder.

    Attributes:
        name: Registry name the encoder was loaded under.
        width: Number of attribute columns each image produces.
        encode_batch: Maps a non-empty list of PIL images to a float64 array
            of shape ``(len(batch), width)``.
    """

    name: str
    width: int
    encode_batch: Callable[[List[Image.Image]], np.ndarray]


def parse_encoder_spec(spec: str) -> tuple[str, str | None]:
    """Split ``"name"`` / ``"name:checkpoint"`` into its two parts."""
    if not spec or not spec.strip():
        raise EncoderLoadError("encoder spec is empty")
    name, sep, checkpoint = spec.partition(":")
    name = name.strip()
    if not name:
        raise EncoderLoadError(f"encoder spec {spec!r} has no encoder name")
    return name, checkpoint if sep else None


def _stub_features(images: List[Image.Image]) -> np.ndarray:
    rows = np.empty((len(images), _STUB_SIDE * _STUB_SIDE), dtype=np.float64)
    for i, img in enumerate(images):
        small = img.convert("L").resize((_STUB_SIDE, _STUB_SIDE), Image.BILINEAR)
        rows[i] = np.asarray(small, dtype=np.float64).ravel() / 255.0
    return rows


def _load_stub(checkpoint: str | None, device: str) -> Encoder:
    """Deterministic checkpoint-free encoder: 8x8 grayscale thumbnail / 255."""
    if checkpoint:
        raise EncoderLoadError("the stub encoder takes no checkpoint")
    return Encoder(name="stub", width=_STUB_SIDE * _STUB_SIDE, encode_batch=_stub_features)


def _load_linear(checkpoint: str | None, device: str) -> Encoder:
    """Linear projection of the stub features by a ``(64, d)`` ``.npy`` matrix."""
    if not checkpoint:
        raise EncoderLoadError("the linear encoder needs a checkpoint: linear:WEIGHTS.npy")
    path = Path(checkpoint)
    try:
        weights = np.load(path)
    except OSError as exc:
        raise EncoderLoadError(f"cannot read checkpoint {path}: {exc}") from exc
    except ValueError as exc:
        raise EncoderLoadError(f"checkpoint {path} is not a valid .npy array: {exc}") from exc
    if weights.ndim != 2 or weights.shape[0] != _STUB_SIDE * _STUB_SIDE:
        raise EncoderLoadError(
            f"checkpoint {path} must have shape (64, d), got {weights.shape}"
        )
    weights = weights.astype(np.float64)
    if not np.isfinite(weights).all():
        raise EncoderLoadError(f"checkpoint {path} contains non-finite weights")

    def encode(images: List[Image.Image]) -> np.ndarray:
        return _stub_features(images) @ weights

    return Encoder(name="linear", width=weights.shape[1], encode_batch=encode)


_REGISTRY: Dict[str, Callable[[str | None, str], Encoder]] = {
    "stub": _load_stub,
    "linear": _load_linear,
}


def available_encoders() -> tuple[str, ...]:
    """Registered encoder names, alphabetical."""
    return tuple(sorted(_REGISTRY))


def load_encoder(spec: str, device: str = "cpu") -> Encoder:
    """Resolve an encoder spec to a ready handle.

    Raises:
        EncoderLoadError: Unknown name, malformed spec, or broken checkpoint.
    """
    name, checkpoint = parse_encoder_spec(spec)
    try:
        loader = _REGISTRY[name]
    except KeyError:
        known = ", ".join(available_encoders())
        raise EncoderLoadError(f"unknown encoder {name!r} (available: {known})") from None
    return loader(checkpoint, device)
