"""ENVI raster and 16-bit PGM input/output.

The single on-disk cube format is ENVI BSQ with 32-bit IEEE-754 samples.
Writers always emit little-endian; the reader honors the header's byte
order. Heatmaps are exported as binary PGM (P5) with maxval 65535.
"""

from __future__ import annotations

import os

import numpy as np

from .hsi import Hsi


class EnviError(ValueError):
    """Base class for ENVI format problems."""


class EnviHeaderError(EnviError):
    """Missing, unparseable, or unsupported header content."""


class EnviPayloadError(EnviError):
    """Header and binary payload disagree structurally."""


_REQUIRED_KEYS = ("samples", "lines", "bands")


def _parse_header_text(text: str) -> dict:
    fields = {}
    key = None
    collecting = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.upper() == "ENVI":
            continue
        if collecting is not None:
            collecting.append(line.rstrip("}").strip())
            if line.endswith("}"):
                fields[key] = " ".join(collecting).strip()
                collecting = None
            continue
        if "=" not in line:
            raise EnviHeaderError(f"unparseable header line: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if value.startswith("{") and not value.endswith("}"):
            collecting = [value.lstrip("{").strip()]
            continue
        fields[key] = value.strip("{}").strip()
    if collecting is not None:
        raise EnviHeaderError("unterminated brace list in header")
    return fields


def _data_path_for_header(header_path: str) -> str:
    stem = header_path[:-4] if header_path.endswith(".hdr") else header_path
    for candidate in (stem, stem + ".img", stem + ".bsq"):
        if os.path.exists(candidate):
            return candidate
    raise EnviPayloadError(f"no binary payload found next to {header_path}")


def load_envi(header_path: str) -> Hsi:
    """Read a BSQ float32 cube described by an ENVI text header."""
    if not os.path.exists(header_path):
        raise EnviHeaderError(f"header not found: {header_path}")
    with open(header_path, "r", encoding="utf-8") as fh:
        fields = _parse_header_text(fh.read())
    for k in _REQUIRED_KEYS:
        if k not in fields:
            raise EnviHeaderError(f"header missing required key {k!r}")
    try:
        width = int(fields["samples"])
        height = int(fields["lines"])
        bands = int(fields["bands"])
    except ValueError as exc:
        raise EnviHeaderError(f"non-integer dimension in header: {exc}") from exc
    if min(width, height, bands) <= 0:
        raise EnviHeaderError("dimensions must be positive")
    dtype_code = int(fields.get("data type", "4"))
    if dtype_code != 4:
        raise EnviHeaderError(f"unsupported data type {dtype_code} (only 4 = float32)")
    interleave = fields.get("interleave", "bsq").lower()
    if interleave != "bsq":
        raise EnviHeaderError(f"unsupported interleave {interleave!r} (only bsq)")
    byte_order = int(fields.get("byte order", "0"))
    if byte_order not in (0, 1):
        raise EnviHeaderError(f"invalid byte order {byte_order}")
    dtype = "<f4" if byte_order == 0 else ">f4"

    data_path = _data_path_for_header(header_path)
    raw = np.fromfile(data_path, dtype=dtype)
    expected = width * height * bands
    if raw.size != expected:
        raise EnviPayloadError(
            f"payload holds {raw.size} samples, header declares {expected}"
        )
    cube = raw.reshape(bands, height, width).transpose(1, 2, 0)

    wavelengths = None
    if "wavelength" in fields:
        try:
            wavelengths = [float(tok) for tok in fields["wavelength"].split(",") if tok.strip()]
        except ValueError as exc:
            raise EnviHeaderError(f"bad wavelength list: {exc}") from exc
    return Hsi(np.ascontiguousarray(cube, dtype=np.float32), wavelengths=wavelengths)


def save_envi(h: Hsi, path: str) -> None:
    """Write the cube payload at ``path`` and its header at ``path + '.hdr'``."""
    header_lines = [
        "ENVI",
        f"samples = {h.width}",
        f"lines = {h.height}",
        f"bands = {h.bands}",
        "header offset = 0",
        "data type = 4",
        "interleave = bsq",
        "byte order = 0",
    ]
    if h.wavelengths is not None:
        header_lines.append("wavelength = {" + ", ".join(f"{w:g}" for w in h.wavelengths) + "}")
    try:
        with open(path, "wb") as fh:
            h.data.transpose(2, 0, 1).astype("<f4").tofile(fh)
        with open(path + ".hdr", "w", encoding="utf-8") as fh:
            fh.write("\n".join(header_lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write ENVI output at {path}: {exc}") from exc


def write_pgm(values: np.ndarray, path: str) -> None:
    """Export a map as 16-bit binary PGM; float input is scaled from [0, 1]."""
    a = np.asarray(values)
    if a.ndim != 2:
        raise ValueError(f"PGM export needs a 2-d map, got shape {a.shape}")
    if a.dtype == np.uint16:
        pixels = a
    else:
        pixels = np.round(np.clip(a, 0.0, 1.0) * 65535.0).astype(np.uint16)
    header = f"P5\n{a.shape[1]} {a.shape[0]}\n65535\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(pixels.astype(">u2").tobytes())


def read_pgm(path: str) -> np.ndarray:
    """Read a binary PGM into a uint16 (H, W) array."""
    with open(path, "rb") as fh:
        blob = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        tokens.append(blob[start:pos])
    pos += 1
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic != b"P5":
        raise ValueError(f"not a binary PGM: magic {magic!r}")
    dtype = ">u2" if maxval > 255 else "u1"
    data = np.frombuffer(blob, dtype=dtype, offset=pos, count=width * height)
    if data.size != width * height:
        raise ValueError("truncated PGM payload")
    return data.reshape(height, width).astype(np.uint16)
