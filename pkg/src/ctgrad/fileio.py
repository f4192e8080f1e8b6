"""Binary sinogram/image formats, CSV import and display export.

All binary formats are little-endian with a 5-byte magic.

``SINO1``::

    magic[5] | version u32 | n_angles u32 | n_s u32 | s_spacing f64
    | angles f64[n_angles] | payload f32[n_angles * n_s] (angle-major)

``IMGF1``::

    magic[5] | n u32 | pixel_size f64 | payload f32[n * n] (row-major)

Display export writes 16-bit PGM plus a ``.minmax.txt`` sidecar.  It is lossy
and meant for viewing only.
"""

from __future__ import annotations

import csv
import os
import struct

import numpy as np

from .core import AngleSet, DetectorGrid, EdgeMap, ImageGrid, Sinogram

__all__ = [
    "FormatError",
    "SINO_MAGIC",
    "IMG_MAGIC",
    "SINO_VERSION",
    "write_sinogram",
    "read_sinogram",
    "write_image",
    "read_image",
    "write_edge_map",
    "read_edge_map",
    "import_sinogram_csv",
    "export_view",
    "read_view",
    "sidecar_path",
]

SINO_MAGIC = b"SINO1"
IMG_MAGIC = b"IMGF1"
SINO_VERSION = 1

_SINO_HEADER = struct.Struct("<5sIIId")
_IMG_HEADER = struct.Struct("<5sId")
_PGM_MAX = 65535


class FormatError(ValueError):
    """Malformed or truncated input file."""


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _check_size(path, what, expected, actual):
    if actual < expected:
        raise FormatError(f"{path}: truncated {what}: expected {expected} bytes, got {actual}")
    if actual > expected:
        raise FormatError(f"{path}: {actual - expected} trailing bytes after {what} (expected {expected} bytes total)")


def encode_sinogram(sino: Sinogram) -> bytes:
    header = _SINO_HEADER.pack(SINO_MAGIC, SINO_VERSION, sino.n_angles, sino.n_s, sino.s_spacing)
    return (
        header
        + sino.angles.astype("<f8").tobytes()
        + sino.data.astype("<f4").tobytes()
    )


def write_sinogram(sino: Sinogram, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_sinogram(sino))


def read_sinogram(path) -> Sinogram:
    raw = _read_bytes(path)
    if len(raw) < _SINO_HEADER.size:
        _check_size(path, "header", _SINO_HEADER.size, len(raw))
    magic, version, n_angles, n_s, s_spacing = _SINO_HEADER.unpack_from(raw)
    if magic != SINO_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {SINO_MAGIC!r}")
    if version != SINO_VERSION:
        raise FormatError(f"{path}: unsupported SINO1 version {version}")
    expected = _SINO_HEADER.size + 8 * n_angles + 4 * n_angles * n_s
    _check_size(path, "sinogram file", expected, len(raw))
    off = _SINO_HEADER.size
    angles = np.frombuffer(raw, "<f8", n_angles, off)
    data = np.frombuffer(raw, "<f4", n_angles * n_s, off + 8 * n_angles).reshape(n_angles, n_s)
    return Sinogram(data.astype(np.float64), AngleSet(angles), DetectorGrid(n_s, s_spacing))


def encode_image(data: np.ndarray, pixel_size: float) -> bytes:
    n = data.shape[0]
    return _IMG_HEADER.pack(IMG_MAGIC, n, pixel_size) + np.asarray(data).astype("<f4").tobytes()


def write_image(img: ImageGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_image(img.data, img.pixel_size))


def _read_image_array(path):
    raw = _read_bytes(path)
    if len(raw) < _IMG_HEADER.size:
        _check_size(path, "header", _IMG_HEADER.size, len(raw))
    magic, n, pixel_size = _IMG_HEADER.unpack_from(raw)
    if magic != IMG_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {IMG_MAGIC!r}")
    _check_size(path, "image file", _IMG_HEADER.size + 4 * n * n, len(raw))
    data = np.frombuffer(raw, "<f4", n * n, _IMG_HEADER.size).reshape(n, n)
    return data.astype(np.float64), pixel_size


def read_image(path) -> ImageGrid:
    data, pixel_size = _read_image_array(path)
    return ImageGrid(data, pixel_size)


def write_edge_map(edges: EdgeMap, path, pixel_size: float = 1.0) -> None:
    """Store an edge map as an ``IMGF1`` image of zeros and ones."""
    with open(path, "wb") as fh:
        fh.write(encode_image(edges.data.astype(np.float32), pixel_size))


def read_edge_map(path) -> EdgeMap:
    """Read an edge map from ``IMGF1`` (nonzero = edge) or binary 16-bit PGM."""
    with open(path, "rb") as fh:
        head = fh.read(5)
    if head == IMG_MAGIC:
        data, _ = _read_image_array(path)
    elif head[:2] == b"P5":
        data, _ = _read_pgm(path)
    else:
        raise FormatError(f"{path}: not an IMGF1 image or PGM file")
    return EdgeMap(data != 0)


def import_sinogram_csv(path, s_spacing: float, angles=None) -> Sinogram:
    """One detector row per line; angles default to ``k * pi / n_rows``."""
    rows = []
    with open(path, newline="") as fh:
        for idx, row in enumerate(csv.reader(fh)):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise FormatError(f"{path}: row {idx}: {exc}") from None
            if len(rows[-1]) != len(rows[0]):
                raise FormatError(
                    f"{path}: row {idx} has {len(rows[-1])} values, expected {len(rows[0])}"
                )
    if not rows:
        raise FormatError(f"{path}: no data rows")
    data = np.array(rows)
    angle_set = AngleSet.even(data.shape[0]) if angles is None else AngleSet(angles)
    if len(angle_set) != data.shape[0]:
        raise FormatError(f"{path}: {data.shape[0]} rows but {len(angle_set)} angles")
    return Sinogram(data, angle_set, DetectorGrid(data.shape[1], s_spacing))


def sidecar_path(path) -> str:
    return os.fspath(path) + ".minmax.txt"


def _write_pgm(path, levels: np.ndarray) -> None:
    n_r, n_c = levels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{n_c} {n_r}\n{_PGM_MAX}\n".encode("ascii"))
        fh.write(levels.astype(">u2").tobytes())


def _read_pgm(path):
    raw = _read_bytes(path)
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(raw):
            raise FormatError(f"{path}: truncated PGM header")
        if raw[pos : pos + 1] == b"#":
            pos = raw.find(b"\n", pos)
            if pos < 0:
                raise FormatError(f"{path}: truncated PGM header")
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(f"{path}: malformed PGM header") from None
    pos += 1
    dtype = ">u2" if maxval > 255 else "u1"
    size = width * height * np.dtype(dtype).itemsize
    _check_size(path, "PGM payload", pos + size, len(raw))
    return np.frombuffer(raw, dtype, width * height, pos).reshape(height, width), maxval


def export_view(img, path) -> None:
    """Write a min/max-normalized 16-bit PGM; edge maps become 0/65535.

    For images the min and max are written to :func:`sidecar_path`.  A
    constant image maps to mid-gray (32768).
    """
    if isinstance(img, EdgeMap):
        _write_pgm(path, np.where(img.data, _PGM_MAX, 0))
        return
    data = img.data if isinstance(img, ImageGrid) else np.asarray(img, dtype=np.float64)
    lo, hi = float(data.min()), float(data.max())
    if hi > lo:
        levels = np.rint((data - lo) / (hi - lo) * _PGM_MAX)
    else:
        levels = np.full(data.shape, 32768)
    _write_pgm(path, levels)
    with open(sidecar_path(path), "w") as fh:
        fh.write(f"min={lo!r}\nmax={hi!r}\n")


def read_view(path) -> np.ndarray:
    """Approximate physical values of an exported view (display round trip only)."""
    levels, maxval = _read_pgm(path)
    meta = {}
    with open(sidecar_path(path)) as fh:
        for line in fh:
            key, _, value = line.strip().partition("=")
            meta[key] = float(value)
    lo, hi = meta["min"], meta["max"]
    if hi == lo:
        return np.full(levels.shape, lo)
    return lo + levels.astype(np.float64) / maxval * (hi - lo)
