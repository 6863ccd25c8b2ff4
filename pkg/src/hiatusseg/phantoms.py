"""Synthetic ultrasound-like phantoms with exact ground truth.

A phantom is a bright region on a darker background with up to three kinds
of artefact:

* gap arcs, where the boundary step is replaced by a slow ramp down to the
  background level (weak or missing edge);
* a low-order polynomial bias field (intensity inhomogeneity);
* distractor blobs outside the region with the interior intensity.

The image is ``clip(blur(base) * (1 + bias) * speckle, 0, 1)`` where speckle
is multiplicative Gaussian noise of mean 1. The mask depends on the region
geometry only.
"""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"


@dataclass
class PhantomSpec:
    width: int = 256
    height: int = 256
    shape: str = "ellipse"
    # ellipse geometry, pixel coordinates (x = column, y = row)
    center_x: float = 128.0
    center_y: float = 128.0
    semi_a: float = 60.0
    semi_b: float = 60.0
    # polygon geometry: ((x, y), ...) vertices, used when shape == "polygon"
    polygon: tuple = ()
    interior_level: float = 0.6
    background_level: float = 0.3
    edge_blur: float = 2.0
    # (start, extent) in degrees, counter-clockwise from +x with y pointing up
    gap_arcs: tuple = ()
    gap_ramp: float = 20.0
    # bias = cx*X + cy*Y + cxx*X^2 + cxy*X*Y + cyy*Y^2, X and Y in [-1, 1]
    bias: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)
    # (x, y, radius) discs
    distractors: tuple = ()
    speckle_sigma: float = 0.2
    rng_seed: int = 0

    def __post_init__(self):
        self.gap_arcs = tuple(tuple(map(float, g)) for g in self.gap_arcs)
        self.distractors = tuple(tuple(map(float, d)) for d in self.distractors)
        self.polygon = tuple(tuple(map(float, p)) for p in self.polygon)
        self.bias = tuple(float(b) for b in self.bias) + (0.0,) * (5 - len(self.bias))
        if len(self.bias) != 5:
            raise ValueError("bias takes at most 5 coefficients")
        if self.width < 8 or self.height < 8:
            raise ValueError("phantom must be at least 8x8")
        if self.shape not in ("ellipse", "polygon"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.shape == "ellipse" and not (self.semi_a > 0 and self.semi_b > 0):
            raise ValueError("ellipse semi-axes must be positive")
        if self.shape == "polygon" and len(self.polygon) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if self.speckle_sigma < 0 or self.edge_blur < 0 or self.gap_ramp <= 0:
            raise ValueError("speckle_sigma, edge_blur must be >= 0 and gap_ramp > 0")
        if any(len(d) != 3 or d[2] <= 0 for d in self.distractors):
            raise ValueError("distractors are (x, y, radius) with radius > 0")
        if any(len(g) != 2 for g in self.gap_arcs):
            raise ValueError("gap arcs are (start, extent) pairs")

    @property
    def contrast(self):
        return self.interior_level - self.background_level

    def centre(self):
        if self.shape == "ellipse":
            return self.center_x, self.center_y
        pts = np.array(self.polygon)
        return float(pts[:, 0].mean()), float(pts[:, 1].mean())


def _grid(spec):
    rows, cols = np.mgrid[0:spec.height, 0:spec.width]
    return rows.astype(np.float64), cols.astype(np.float64)


def _polygon_mask(vertices, rows, cols):
    # even-odd rule, pixel centres
    inside = np.zeros(rows.shape, dtype=bool)
    pts = list(vertices)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        if y0 == y1:
            continue
        crosses = (y0 > rows) != (y1 > rows)
        x_at = x0 + (rows - y0) * (x1 - x0) / (y1 - y0)
        inside ^= crosses & (cols < x_at)
    return inside


def shape_mask(spec):
    rows, cols = _grid(spec)
    if spec.shape == "ellipse":
        mask = (((cols - spec.center_x) / spec.semi_a) ** 2
                + ((rows - spec.center_y) / spec.semi_b) ** 2) <= 1.0
    else:
        mask = _polygon_mask(spec.polygon, rows, cols)
    return mask


def _angles(spec, rows, cols):
    cx, cy = spec.centre()
    return np.degrees(np.arctan2(-(rows - cy), cols - cx)) % 360.0


def gap_sector(spec):
    """Pixels whose polar angle around the region centre falls in a gap arc."""
    rows, cols = _grid(spec)
    ang = _angles(spec, rows, cols)
    sector = np.zeros(ang.shape, dtype=bool)
    for start, extent in spec.gap_arcs:
        sector |= ((ang - start) % 360.0) <= extent
    return sector


def bias_field(spec):
    rows, cols = _grid(spec)
    x = (cols - (spec.width - 1) / 2.0) / ((spec.width - 1) / 2.0)
    y = -(rows - (spec.height - 1) / 2.0) / ((spec.height - 1) / 2.0)
    cx, cy, cxx, cxy, cyy = spec.bias
    return cx * x + cy * y + cxx * x * x + cxy * x * y + cyy * y * y


def clean_image(spec, mask=None):
    """Noise-free intensity: blurred two-level image with gaps and distractors."""
    if mask is None:
        mask = shape_mask(spec)
    lo, hi = spec.background_level, spec.interior_level
    base = np.where(mask, hi, lo)
    if spec.gap_arcs:
        dist_out = ndi.distance_transform_edt(~mask)
        ramp = hi + (lo - hi) * np.clip(dist_out / spec.gap_ramp, 0.0, 1.0)
        base = np.where(gap_sector(spec) & ~mask, ramp, base)
    rows, cols = _grid(spec)
    for x, y, r in spec.distractors:
        base = np.where((cols - x) ** 2 + (rows - y) ** 2 <= r * r, hi, base)
    if spec.edge_blur > 0:
        base = ndi.gaussian_filter(base, spec.edge_blur, mode="nearest")
    return base * (1.0 + bias_field(spec))


def generate(spec):
    """Return ``(image, mask)``; identical specs give bit-identical images."""
    mask = shape_mask(spec)
    if not mask.any():
        raise ValueError("phantom shape lies outside the image")
    if mask.all():
        raise ValueError("phantom shape covers the whole image")
    img = clean_image(spec, mask)
    if spec.speckle_sigma > 0:
        rng = np.random.default_rng(spec.rng_seed)
        img = img * (1.0 + spec.speckle_sigma * rng.standard_normal(img.shape))
    return np.clip(img, 0.0, 1.0), mask


# --- plain-text spec files ------------------------------------------------

def _pairs(text, size):
    out = []
    for chunk in str(text).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        vals = tuple(float(v) for v in chunk.replace(":", ",").split(","))
        if len(vals) != size:
            raise ValueError(f"expected {size} numbers in {chunk!r}")
        out.append(vals)
    return tuple(out)


def spec_from_config(values):
    """Build a :class:`PhantomSpec` from ``key = value`` strings."""
    kw = {}
    known = set(PhantomSpec.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown phantom keys: {sorted(unknown)}")
    for key, raw in values.items():
        if key == "shape":
            kw[key] = str(raw).strip()
        elif key in ("width", "height", "rng_seed"):
            kw[key] = int(raw)
        elif key == "gap_arcs":
            kw[key] = _pairs(raw, 2)
        elif key == "distractors":
            kw[key] = _pairs(raw, 3)
        elif key == "polygon":
            kw[key] = _pairs(raw, 2)
        elif key == "bias":
            kw[key] = tuple(float(v) for v in str(raw).split(",") if v.strip())
        else:
            kw[key] = float(raw)
    return PhantomSpec(**kw)


def spec_to_config(spec):
    def fmt(groups):
        return "; ".join(",".join(f"{v:g}" for v in g) for g in groups)

    out = {}
    for name in PhantomSpec.__dataclass_fields__:
        value = getattr(spec, name)
        if name in ("gap_arcs", "distractors", "polygon"):
            value = fmt(value)
        elif name == "bias":
            value = ",".join(f"{v:g}" for v in value)
        elif isinstance(value, float):
            value = f"{value:g}"
        out[name] = value
    out["rng_algorithm"] = RNG_ALGORITHM
    return out
