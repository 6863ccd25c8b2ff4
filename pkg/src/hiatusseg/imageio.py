"""Grayscale image I/O: binary PGM (8/16-bit, bit exact), PNG via Pillow."""
import re
from pathlib import Path

import numpy as np
from PIL import Image

_PGM_HEADER = re.compile(rb"P5\s+(?:#[^\n]*\n\s*)*(\d+)\s+(?:#[^\n]*\n\s*)*(\d+)"
                         rb"\s+(?:#[^\n]*\n\s*)*(\d+)\s")


def read_pgm(path):
    data = Path(path).read_bytes()
    m = _PGM_HEADER.match(data)
    if not m:
        raise ValueError(f"{path}: not a binary (P5) PGM file")
    width, height, maxval = (int(g) for g in m.groups())
    if not 0 < maxval < 65536:
        raise ValueError(f"{path}: bad maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    pixels = np.frombuffer(data, dtype=dtype, count=count, offset=m.end())
    return pixels.reshape(height, width).astype(np.uint16 if maxval > 255 else np.uint8)


def write_pgm(path, array):
    arr = np.asarray(array)
    if arr.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    if arr.dtype == np.uint8 or arr.dtype == bool:
        maxval, payload = 255, arr.astype(np.uint8).tobytes()
    elif arr.dtype == np.uint16:
        maxval, payload = 65535, arr.astype(">u2").tobytes()
    else:
        raise ValueError(f"unsupported PGM dtype {arr.dtype}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + payload)


def read_image(path):
    """Read a grayscale image as its stored integer array."""
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        return read_pgm(path)
    with Image.open(path) as im:
        if im.mode not in ("L", "I;16", "I;16B", "I"):
            im = im.convert("L")
        return np.array(im)


def to_unit(array):
    """Float image in [0, 1] from an integer or float array (min-max)."""
    arr = np.asarray(array, dtype=np.float64)
    lo, hi = arr.min(), arr.max()
    if hi <= lo:
        return np.zeros_like(arr)
    return (arr - lo) / (hi - lo)


def to_uint8(unit):
    return np.round(np.clip(unit, 0.0, 1.0) * 255.0).astype(np.uint8)


def to_uint16(unit):
    return np.round(np.clip(unit, 0.0, 1.0) * 65535.0).astype(np.uint16)


def write_mask(path, mask):
    write_pgm(path, np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8))


def read_mask(path):
    return read_image(path) > 0


def write_overlay(path, image_unit, contour):
    """PNG of the image with contour pixels burned in at full intensity."""
    out = to_uint8(image_unit)
    out[np.asarray(contour, dtype=bool)] = 255
    Image.fromarray(out, mode="L").save(path)
