"""Image-folder extraction into the ADIF attribute-matrix format.

This package runs a pluggable image encoder over a directory tree and writes
the resulting attribute matrix as a standalone ADIF file; it shares no code
with the analysis side and talks to it only through that file format.
"""

from .adif_writer import write_adif
from .encoders import Encoder, available_encoders, load_encoder, parse_encoder_spec
from .errors import AdapterError, EncoderLoadError, ExtractError, ValidationError
from .extract import IMAGE_EXTENSIONS, ExtractJob, ExtractResult, extract

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "Encoder",
    "EncoderLoadError",
    "ExtractError",
    "ExtractJob",
    "ExtractResult",
    "IMAGE_EXTENSIONS",
    "ValidationError",
    "available_encoders",
    "extract",
    "load_encoder",
    "parse_encoder_spec",
    "write_adif",
]
