"""File I/O with bit-exact contracts.

Token tensors and projector arrays travel as NPY version 1.0 (strictly: no
v2/v3 headers, C order, little-endian float32/float64). Grayscale frames are
binary PGM (P5) or 2-D NPY. Reports are canonical JSON: UTF-8, keys sorted,
reals at 17 significant digits, so identical inputs yield identical bytes.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ShapeError, SizeError, ValidationError

_NPY_MAGIC = b"\x93NUMPY"
_DESCR_DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8")}


@dataclass(frozen=True)
class TokenTensor:
    """Dense patch-token embeddings of shape (frames, tokens_per_frame, dim).

    Holds patch tokens only; the per-frame global token is a positional
    convention handled at selection time and never stored here.
    """

    data: np.ndarray

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def tokens_per_frame(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ImageFrame:
    """Grayscale frame with pixel values in [0, 1], at least 3x3."""

    pixels: np.ndarray

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


# ---------------------------------------------------------------------------
# NPY v1.0


def _parse_npy(data: bytes, path: str) -> np.ndarray:
    if len(data) < 6 or data[:6] != _NPY_MAGIC:
        raise FormatError(f"{path}: bad NPY magic at byte 0")
    if len(data) < 8:
        raise FormatError(f"{path}: truncated NPY version field at byte 6")
    major, minor = data[6], data[7]
    if (major, minor) != (1, 0):
        raise FormatError(
            f"{path}: unsupported NPY version {major}.{minor} at byte 6 "
            "(only 1.0 is accepted)"
        )
    if len(data) < 10:
        raise FormatError(f"{path}: truncated header length at byte 8")
    header_len = int.from_bytes(data[8:10], "little")
    header_end = 10 + header_len
    if len(data) < header_end:
        raise FormatError(f"{path}: truncated header at byte 10")
    try:
        header = ast.literal_eval(data[10:header_end].decode("latin-1").strip())
    except (ValueError, SyntaxError, TypeError, MemoryError, RecursionError) as exc:
        raise FormatError(f"{path}: unparseable header dict at byte 10 ({exc})") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError(f"{path}: header must contain exactly descr/fortran_order/shape")
    descr = header["descr"]
    if not isinstance(descr, str) or descr not in _DESCR_DTYPES:
        raise FormatError(f"{path}: unsupported descr {descr!r} (expected '<f4' or '<f8')")
    if header["fortran_order"] is not False:
        raise FormatError(f"{path}: fortran_order must be False")
    shape = header["shape"]
    if not (
        isinstance(shape, tuple)
        and all(isinstance(d, int) and not isinstance(d, bool) and d >= 0 for d in shape)
    ):
        raise FormatError(f"{path}: shape must be a tuple of nonnegative integers")
    dtype = _DESCR_DTYPES[descr]
    count = math.prod(shape)
    payload = data[header_end:]
    if len(payload) != count * dtype.itemsize:
        raise FormatError(
            f"{path}: payload holds {len(payload)} bytes, "
            f"expected {count * dtype.itemsize} for shape {shape}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(shape)


def _npy_bytes(array: np.ndarray) -> bytes:
    descr = {np.dtype("<f4"): "<f4", np.dtype("<f8"): "<f8"}.get(array.dtype)
    if descr is None:
        raise FormatError(f"cannot serialize dtype {array.dtype}; use float32/float64")
    shape = tuple(int(d) for d in array.shape)
    header = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (descr, shape)
    # pad so that magic+version+len+header+newline is a multiple of 64
    total = 10 + len(header) + 1
    header = header + " " * (-total % 64) + "\n"
    out = bytearray()
    out += _NPY_MAGIC
    out += bytes((1, 0))
    out += len(header).to_bytes(2, "little")
    out += header.encode("latin-1")
    out += np.ascontiguousarray(array).tobytes()
    return bytes(out)


def load_npy_array(path: str | Path, rank: int) -> np.ndarray:
    """Load an NPY v1.0 array of the given rank, upcast to float64."""
    data = Path(path).read_bytes()
    arr = _parse_npy(data, str(path))
    if arr.ndim != rank:
        raise ShapeError(f"{path}: expected a {rank}-D array, got {arr.ndim}-D shape {arr.shape}")
    return arr.astype(np.float64)


def load_token_tensor(path: str | Path) -> TokenTensor:
    arr = load_npy_array(path, rank=3)
    if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise ShapeError(f"{path}: all tensor dimensions must be at least 1, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{path}: tensor contains NaN or Inf")
    return TokenTensor(data=arr)


def save_token_tensor(path: str | Path, tensor: TokenTensor) -> None:
    Path(path).write_bytes(_npy_bytes(tensor.data))


# ---------------------------------------------------------------------------
# Frames (PGM / NPY)


def _pgm_header_tokens(data: bytes):
    """Yield (offset, token) over the PGM header, skipping '#' comments."""
    i = 0
    while i < len(data):
        c = data[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < len(data) and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            start = i
            while i < len(data) and not data[i : i + 1].isspace():
                i += 1
            yield start, data[start:i]
            i += 1  # consume the single whitespace after the token
            continue


def _parse_pgm(data: bytes, path: str) -> np.ndarray:
    if data[:2] == b"P2":
        raise FormatError(f"{path}: ASCII PGM (P2) is not supported; use binary P5")
    if data[:2] != b"P5":
        raise FormatError(f"{path}: not a PGM file (missing P5 magic)")
    tokens = _pgm_header_tokens(data[2:])
    values = []
    offset_after = 2
    try:
        for _ in range(3):
            start, tok = next(tokens)
            values.append(int(tok))
            offset_after = 2 + start + len(tok) + 1
    except (StopIteration, ValueError) as exc:
        raise FormatError(f"{path}: malformed PGM header ({exc})") from exc
    width, height, maxval = values
    if width < 1 or height < 1:
        raise FormatError(f"{path}: nonpositive PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise FormatError(f"{path}: PGM maxval {maxval} outside [1, 65535]")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    payload = data[offset_after:]
    expected = width * height * dtype.itemsize
    if len(payload) < expected:
        raise FormatError(
            f"{path}: PGM payload holds {len(payload)} bytes, expected {expected}"
        )
    raw = np.frombuffer(payload[:expected], dtype=dtype).reshape(height, width)
    return raw.astype(np.float64) / float(maxval)


def load_frame(path: str | Path) -> ImageFrame:
    """Load a grayscale frame from binary PGM (P5) or a 2-D NPY array.

    PGM samples are rescaled to [0, 1] by the stored maxval; NPY values are
    clamped into [0, 1].
    """
    p = Path(path)
    data = p.read_bytes()
    if data[:6] == _NPY_MAGIC:
        arr = _parse_npy(data, str(path)).astype(np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"{path}: frame NPY must be 2-D, got {arr.ndim}-D")
        if not np.isfinite(arr).all():
            raise ValidationError(f"{path}: frame contains NaN or Inf")
        pixels = np.clip(arr, 0.0, 1.0)
    else:
        pixels = _parse_pgm(data, str(path))
    if pixels.shape[0] < 3 or pixels.shape[1] < 3:
        raise SizeError(f"{path}: frame must be at least 3x3, got {pixels.shape}")
    return ImageFrame(pixels=pixels)


# ---------------------------------------------------------------------------
# Canonical JSON reports


def _format_real(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValidationError("reports may not contain NaN or Inf")
    s = format(x, ".17g")
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def _emit(obj, parts: list) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_format_real(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), parts)
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for k, item in enumerate(obj):
            if k:
                parts.append(", ")
            _emit(item, parts)
        parts.append("]")
    elif isinstance(obj, dict):
        parts.append("{")
        for k, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise ValidationError(f"report keys must be strings, got {type(key).__name__}")
            if k:
                parts.append(", ")
            parts.append(json.dumps(key, ensure_ascii=False))
            parts.append(": ")
            _emit(obj[key], parts)
        parts.append("}")
    else:
        raise ValidationError(f"cannot serialize {type(obj).__name__} into a report")


def dumps_report(report) -> str:
    """Canonical JSON text: sorted keys, 17-significant-digit reals."""
    obj = report.to_dict() if hasattr(report, "to_dict") else report
    parts: list = []
    _emit(obj, parts)
    parts.append("\n")
    return "".join(parts)


def save_report(path: str | Path, report) -> None:
    """Write a report as canonical JSON; identical inputs yield identical bytes."""
    Path(path).write_bytes(dumps_report(report).encode("utf-8"))
