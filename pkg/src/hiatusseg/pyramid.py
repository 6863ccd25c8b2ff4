"""Gaussian pyramid and coarse-to-fine transfer of level-set fields."""
import math

import numpy as np
from scipy import ndimage as ndi

from .grid import as_grid, levelset_from_mask

BINOMIAL_5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
MIN_LEVEL_SIZE = 8


def reduce_level(image):
    """Blur with the separable 5-tap binomial kernel and keep every other pixel."""
    blurred = ndi.correlate1d(image, BINOMIAL_5, axis=0, mode="mirror")
    blurred = ndi.correlate1d(blurred, BINOMIAL_5, axis=1, mode="mirror")
    return blurred[::2, ::2]


def level_shape(shape, level):
    h, w = shape
    for _ in range(level):
        h, w = math.ceil(h / 2), math.ceil(w / 2)
    return h, w


def effective_scales(shape, n_scales):
    """Largest usable scale count ``<= n_scales`` keeping every level >= 8 px per axis."""
    n = 1
    while n < n_scales and min(level_shape(shape, n)) >= MIN_LEVEL_SIZE:
        n += 1
    return n


def build_pyramid(image, n_scales=5):
    """Decompose ``image`` into up to ``n_scales`` levels, finest first.

    Level ``k+1`` has ``ceil(size_k / 2)`` pixels per axis. The count is
    clamped so the coarsest level stays at least 8 pixels on each axis.
    """
    img = as_grid(image, "image")
    if n_scales < 2:
        raise ValueError("n_scales must be at least 2")
    if min(img.shape) < MIN_LEVEL_SIZE:
        raise ValueError(f"image {img.shape} is smaller than 8x8")
    levels = [img]
    for _ in range(effective_scales(img.shape, n_scales) - 1):
        levels.append(reduce_level(levels[-1]))
    return levels


def _axis_scale(src, dst):
    # the pyramid keeps fine pixel 2j as coarse pixel j
    if dst in (2 * src - 1, 2 * src):
        return 2.0
    return dst / src


def upsample_levelset(phi_coarse, target_width, target_height):
    """Carry a coarse level-set function to a finer grid.

    Bilinear interpolation, rescaling of the values by the mean axis factor,
    then reinitialization to a signed distance field.
    """
    phi = as_grid(phi_coarse, "phi")
    h, w = phi.shape
    ratios = (target_height / h, target_width / w)
    if not all(1.5 <= r <= 2.5 for r in ratios):
        raise ValueError(
            f"target {target_width}x{target_height} is not 1.5x-2.5x of {w}x{h}")
    sy = _axis_scale(h, target_height)
    sx = _axis_scale(w, target_width)
    rows = np.arange(target_height) / sy
    cols = np.arange(target_width) / sx
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    fine = ndi.map_coordinates(phi, [rr, cc], order=1, mode="nearest")
    fine *= 0.5 * (sx + sy)
    return levelset_from_mask(fine > 0)
