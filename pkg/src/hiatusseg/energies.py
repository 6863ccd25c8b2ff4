"""Energy terms of the local-region model and the fields feeding its flow.

The functional is ``omega1 * E_local + omega2 * S + omega3 * R``:

* ``E_local`` compares, for every pixel ``x`` of the narrow band, the
  intensities of its square patch against the patch's interior mean ``u(x)``
  and exterior mean ``v(x)``;
* ``S`` penalizes interior pixels lying farther than ``r_s`` from the contour
  found at the previous (coarser) scale;
* ``R`` is the length of the smoothed contour.

All energies are plain pixel sums (unit grid spacing).
"""
from dataclasses import dataclass, fields

import numpy as np

from .grid import (
    GRAD_FLOOR,
    as_grid,
    box_sum,
    check_same_shape,
    dirac_smoothed,
    distance_transform,
    heaviside_smoothed,
)


@dataclass
class ModelParams:
    omega1: float = 0.9
    omega2: float = 0.1
    omega3: float = 0.8
    patch_radius: int = 5
    band_halfwidth: float = 6.0
    r_s: float = 3.0
    heaviside_eps: float = 0.5
    dt: float = 0.1
    max_iters_per_scale: int = 200
    convergence_tol: float = 1e-4
    reinit_every: int = 20

    def __post_init__(self):
        if min(self.omega1, self.omega2, self.omega3) < 0:
            raise ValueError("weights must be non-negative")
        if self.patch_radius < 1 or int(self.patch_radius) != self.patch_radius:
            raise ValueError("patch_radius must be an integer >= 1")
        self.patch_radius = int(self.patch_radius)
        if self.band_halfwidth < 1:
            raise ValueError("band_halfwidth must be >= 1")
        if self.r_s < 0:
            raise ValueError("r_s must be >= 0")
        if not self.heaviside_eps > 0 or not self.dt > 0:
            raise ValueError("heaviside_eps and dt must be positive")
        if self.max_iters_per_scale < 0 or self.convergence_tol < 0:
            raise ValueError("iteration budget and tolerance must be >= 0")
        if self.reinit_every < 1:
            raise ValueError("reinit_every must be >= 1")

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass
class LocalStats:
    """Patch means inside (``u``) and outside (``v``) the contour, plus the band."""

    u: np.ndarray
    v: np.ndarray
    band: np.ndarray


def band_indicator(phi, band_halfwidth):
    return np.abs(as_grid(phi, "phi")) < band_halfwidth


def local_stats(image, phi, params):
    """Compute ``u``, ``v`` for every pixel and the band mask.

    A side of the patch with no pixels falls back to the whole-patch mean.
    """
    img = as_grid(image, "image")
    phi = as_grid(phi, "phi")
    check_same_shape(img, phi)
    r = params.patch_radius
    inside = (phi > 0).astype(np.float64)
    n_in = box_sum(inside, r)
    n_all = box_sum(np.ones_like(img), r)
    n_out = n_all - n_in
    s_in = box_sum(img * inside, r)
    s_all = box_sum(img, r)
    s_out = s_all - s_in
    patch_mean = s_all / n_all
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(n_in > 0.5, s_in / n_in, patch_mean)
        v = np.where(n_out > 0.5, s_out / n_out, patch_mean)
    return LocalStats(u=u, v=v, band=band_indicator(phi, params.band_halfwidth))


def shape_penalty_field(previous_contour, r_s):
    """``B_s``: zero within ``r_s`` of the previous contour, the distance elsewhere."""
    if r_s < 0:
        raise ValueError("r_s must be >= 0")
    dist = distance_transform(previous_contour)
    return np.where(dist < r_s, 0.0, dist)


def energy_local(image, phi, params, stats=None):
    img = as_grid(image, "image")
    phi = as_grid(phi, "phi")
    check_same_shape(img, phi)
    if stats is None:
        stats = local_stats(img, phi, params)
    r = params.patch_radius
    hv = heaviside_smoothed(phi, params.heaviside_eps)
    out = 1.0 - hv
    # expand sum_y (I - u)^2 H over the patch into box sums of H, H*I, H*I^2
    a0, a1, a2 = box_sum(hv, r), box_sum(hv * img, r), box_sum(hv * img * img, r)
    b0, b1, b2 = box_sum(out, r), box_sum(out * img, r), box_sum(out * img * img, r)
    u, v = stats.u, stats.v
    per_pixel = (a2 - 2.0 * u * a1 + u * u * a0) + (b2 - 2.0 * v * b1 + v * v * b0)
    return float(np.sum(per_pixel[stats.band]))


def energy_shape(phi, bs, eps):
    phi = as_grid(phi, "phi")
    bs = as_grid(bs, "bs")
    check_same_shape(phi, bs)
    return float(np.sum(heaviside_smoothed(phi, eps) * bs))


def energy_regularizer(phi, eps):
    """Total variation of ``H_eps(phi)`` with central differences (contour length)."""
    hv = heaviside_smoothed(as_grid(phi, "phi"), eps)
    gy, gx = np.gradient(hv)
    return float(np.sum(np.sqrt(gx * gx + gy * gy)))


def _gradient_adjoint(w, axis):
    # transpose of np.gradient along one axis (central inside, one-sided at ends)
    w = np.moveaxis(w, axis, 0)
    out = np.zeros_like(w)
    out[2:] += 0.5 * w[1:-1]
    out[:-2] -= 0.5 * w[1:-1]
    out[1] += w[0]
    out[0] -= w[0]
    out[-1] += w[-1]
    out[-2] -= w[-1]
    return np.moveaxis(out, 0, axis)


def regularizer_gradient(phi, eps):
    """Exact derivative of :func:`energy_regularizer` with respect to every ``phi`` value.

    Equals ``-delta(phi) * div(grad H / |grad H|)`` with the divergence taken
    as the negative transpose of the same central differences, i.e. minus
    ``delta`` times the curvature of the smoothed contour.
    """
    phi = as_grid(phi, "phi")
    if min(phi.shape) < 2:
        raise ValueError("regularizer needs at least 2 pixels per axis")
    gy, gx = np.gradient(heaviside_smoothed(phi, eps))
    norm = np.maximum(np.sqrt(gx * gx + gy * gy), GRAD_FLOOR)
    return dirac_smoothed(phi, eps) * (_gradient_adjoint(gy / norm, 0)
                                       + _gradient_adjoint(gx / norm, 1))


def energy_total(image, phi, params, previous_contour=None, shape_field=None,
                 stats=None):
    """Weighted sum of the three terms.

    The shape term is only present when a previous contour (or its
    precomputed ``shape_field``) is given, i.e. below the coarsest scale.
    """
    if shape_field is None and previous_contour is not None:
        shape_field = shape_penalty_field(previous_contour, params.r_s)
    total = 0.0
    if params.omega1:
        total += params.omega1 * energy_local(image, phi, params, stats)
    if shape_field is not None and params.omega2:
        total += params.omega2 * energy_shape(phi, shape_field, params.heaviside_eps)
    if params.omega3:
        total += params.omega3 * energy_regularizer(phi, params.heaviside_eps)
    return total
