"""Coarse-to-fine segmentation driver.

The image is decomposed into a Gaussian pyramid. The coarsest level is
segmented from the seed ellipse without the shape term; each finer level
starts from the upsampled result of the level below it and is held near that
contour by the shape term.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .energies import ModelParams
from .evolution import EvolutionReport, StopReason, evolve_proposed
from .grid import (
    as_grid,
    levelset_from_mask,
    mask_boundary,
    mask_from_levelset,
)
from .pyramid import build_pyramid, upsample_levelset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ellipse:
    """Axis-aligned ellipse in pixel coordinates (``cx`` = column, ``cy`` = row)."""

    cx: float
    cy: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("ellipse semi-axes must be positive")

    def scaled(self, factor):
        return Ellipse(self.cx * factor, self.cy * factor,
                       self.a * factor, self.b * factor)

    def rasterize(self, shape):
        rows, cols = np.mgrid[0:shape[0], 0:shape[1]]
        return ((cols - self.cx) / self.a) ** 2 + ((rows - self.cy) / self.b) ** 2 <= 1.0

    @classmethod
    def parse(cls, text):
        parts = [float(p) for p in str(text).replace(" ", "").split(",")]
        if len(parts) != 4:
            raise ValueError(f"seed needs cx,cy,a,b; got {text!r}")
        return cls(*parts)

    def __str__(self):
        return f"{self.cx:g},{self.cy:g},{self.a:g},{self.b:g}"


def seed_to_levelset(seed, shape):
    """Signed distance field of the seed ellipse, clipped to the grid."""
    mask = seed.rasterize(shape)
    if not mask.any():
        raise ValueError(f"seed {seed} does not intersect a {shape[1]}x{shape[0]} grid")
    return levelset_from_mask(mask)


@dataclass
class PipelineConfig:
    seed: Ellipse
    n_scales: int = 5
    model: ModelParams = field(default_factory=ModelParams)


@dataclass
class PipelineResult:
    """Per-scale lists are indexed by pyramid level (0 = finest)."""

    final_mask: np.ndarray
    per_scale_masks: list
    per_scale_reports: list
    total_wall_time: float
    phi: np.ndarray = None


class PipelineError(RuntimeError):
    """Evolution degenerated at some scale; carries what was computed so far."""

    def __init__(self, level, partial):
        super().__init__(f"evolution degenerated at pyramid level {level}")
        self.level = level
        self.partial = partial


def _check_seed(seed, shape):
    h, w = shape
    if not (0 <= seed.cx < w and 0 <= seed.cy < h):
        raise ValueError(f"seed centre ({seed.cx}, {seed.cy}) lies outside {w}x{h}")


def run_pipeline(image, config):
    img = as_grid(image, "image")
    if min(img.shape) < 32:
        raise ValueError(f"image {img.shape} is smaller than 32x32")
    _check_seed(config.seed, img.shape)
    start = time.perf_counter()
    levels = [img] if config.n_scales == 1 else build_pyramid(img, config.n_scales)
    n = len(levels)
    masks = [None] * n
    reports = [None] * n

    def partial():
        return PipelineResult(
            final_mask=masks[0], per_scale_masks=masks, per_scale_reports=reports,
            total_wall_time=time.perf_counter() - start)

    coarsest = n - 1
    phi = seed_to_levelset(config.seed.scaled(0.5 ** coarsest), levels[coarsest].shape)
    previous = None
    for k in range(coarsest, -1, -1):
        level = levels[k]
        if k < coarsest:
            phi = upsample_levelset(phi, level.shape[1], level.shape[0])
            previous = mask_boundary(mask_from_levelset(phi))
        phi, report = evolve_proposed(level, phi, previous, config.model)
        reports[k] = report
        log.info("level %d (%dx%d): %d iterations, %s, energy %.6g",
                 k, level.shape[1], level.shape[0], report.iterations_run,
                 report.stop_reason.value, report.final_energy)
        if report.stop_reason is StopReason.DEGENERATE:
            raise PipelineError(k, partial())
        masks[k] = mask_from_levelset(phi)

    result = partial()
    result.phi = phi
    return result


def run_single(image, seed, params=None):
    """The proposed flow on the full-resolution image only, without shape term."""
    img = as_grid(image, "image")
    phi0 = seed_to_levelset(seed, img.shape)
    phi, report = evolve_proposed(img, phi0, None, params or ModelParams())
    return mask_from_levelset(phi), report


__all__ = [
    "Ellipse",
    "EvolutionReport",
    "PipelineConfig",
    "PipelineError",
    "PipelineResult",
    "run_pipeline",
    "run_single",
    "seed_to_levelset",
]
