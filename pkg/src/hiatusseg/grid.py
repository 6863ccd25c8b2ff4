"""Grid primitives shared by every solver.

Images, level-set functions and distance fields are plain 2-D float arrays
indexed ``[row, col]``; masks are boolean arrays of the same shape. Level-set
functions are positive inside the contour.
"""
import numpy as np
from scipy import ndimage as ndi

GRAD_FLOOR = 1e-8
MIN_EVOLVER_SIZE = 4


class DegenerateFieldError(ValueError):
    """A level-set field has no contour left or contains non-finite values."""


def as_grid(values, name="grid"):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def check_same_shape(*arrays):
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def check_evolver_size(arr):
    if min(arr.shape) < MIN_EVOLVER_SIZE:
        raise ValueError(
            f"grid {arr.shape} is too small; need at least "
            f"{MIN_EVOLVER_SIZE}x{MIN_EVOLVER_SIZE}")


def normalize_intensity(image):
    """Min-max map an image to [0, 1]; a constant image maps to zeros."""
    img = as_grid(image, "image")
    lo, hi = float(img.min()), float(img.max())
    if hi - lo <= 0:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)


def _finite(z):
    z = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise DegenerateFieldError("non-finite level-set value (corrupted field)")
    return z


def _result(out, z):
    return float(out) if np.ndim(z) == 0 else out


def heaviside_smoothed(z, eps):
    """Arctan-regularized Heaviside ``0.5 * (1 + 2/pi * arctan(z / eps))``.

    Works elementwise on scalars or arrays.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    z = _finite(z)
    return _result(0.5 * (1.0 + (2.0 / np.pi) * np.arctan(z / eps)), z)


def dirac_smoothed(z, eps):
    """Derivative of :func:`heaviside_smoothed`: ``eps / (pi * (eps**2 + z**2))``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    z = _finite(z)
    return _result(eps / (np.pi * (eps * eps + z * z)), z)


def _curvature_stencil(c, n, s, e, w, ne, nw, se, sw):
    # c = centre value; compass points are rows up (n) / down (s), cols right (e) / left (w)
    px = (e - w) / 2.0
    py = (s - n) / 2.0
    pxx = e - 2.0 * c + w
    pyy = s - 2.0 * c + n
    pxy = (se - sw - ne + nw) / 4.0
    grad2 = px * px + py * py
    norm3 = np.maximum(np.sqrt(grad2), GRAD_FLOOR) ** 3
    return (pxx * py * py - 2.0 * px * py * pxy + pyy * px * px) / norm3


def curvature(phi, x):
    """Mean curvature ``div(grad phi / |grad phi|)`` at interior pixel ``x = (row, col)``.

    Central differences on the 3x3 neighbourhood; the gradient magnitude is
    floored at 1e-8. For an interior-positive field the curvature of a circle
    is ``-1/r`` (the outward-positive distance gives ``+1/r``).
    """
    phi = as_grid(phi, "phi")
    r, c = x
    h, w = phi.shape
    if not (1 <= r < h - 1 and 1 <= c < w - 1):
        raise ValueError(f"pixel {x} is on the border of a {h}x{w} grid")
    p = phi
    return float(_curvature_stencil(
        p[r, c], p[r - 1, c], p[r + 1, c], p[r, c + 1], p[r, c - 1],
        p[r - 1, c + 1], p[r - 1, c - 1], p[r + 1, c + 1], p[r + 1, c - 1]))


def curvature_field(phi):
    """Vectorized :func:`curvature` over the whole grid.

    Border pixels use edge replication, so interior values are identical to
    the pointwise version.
    """
    p = np.pad(as_grid(phi, "phi"), 1, mode="edge")
    return _curvature_stencil(
        p[1:-1, 1:-1], p[:-2, 1:-1], p[2:, 1:-1], p[1:-1, 2:], p[1:-1, :-2],
        p[:-2, 2:], p[:-2, :-2], p[2:, 2:], p[2:, :-2])


def distance_transform(boundary):
    """Exact Euclidean distance from every pixel to the nearest ``True`` pixel."""
    boundary = np.asarray(boundary, dtype=bool)
    if not boundary.any():
        raise ValueError("empty boundary: no previous contour to measure from")
    return ndi.distance_transform_edt(~boundary)


def mask_from_levelset(phi):
    return as_grid(phi, "phi") > 0


def levelset_from_mask(mask):
    """Signed distance field of a mask, positive inside.

    Each pixel gets its distance to the nearest pixel of the opposite class
    minus one half, so the zero level sits midway between neighbouring inside
    and outside pixels and complementing the mask negates the field.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    if mask.all() or not mask.any():
        raise DegenerateFieldError("mask needs both interior and exterior pixels")
    inside = ndi.distance_transform_edt(mask)
    outside = ndi.distance_transform_edt(~mask)
    return np.where(mask, inside - 0.5, -(outside - 0.5))


def reinitialize(phi):
    return levelset_from_mask(mask_from_levelset(phi))


_EIGHT = np.ones((3, 3), dtype=bool)


def mask_boundary(mask):
    """Inner boundary pixels of a mask (inside pixels with an 8-neighbour outside)."""
    mask = np.asarray(mask, dtype=bool)
    eroded = ndi.binary_erosion(mask, structure=_EIGHT, border_value=1)
    return mask & ~eroded


def box_sum(values, radius):
    """Sum over the ``(2r+1)^2`` square around each pixel, clipped to the grid."""
    a = np.asarray(values, dtype=np.float64)
    size = 2 * radius + 1
    # zero padding outside the grid clips the window
    out = ndi.uniform_filter1d(a, size, axis=0, mode="constant", cval=0.0)
    out = ndi.uniform_filter1d(out, size, axis=1, mode="constant", cval=0.0)
    return out * (size * size)
