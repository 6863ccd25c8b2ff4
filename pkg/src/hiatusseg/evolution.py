"""Explicit level-set evolvers.

``evolve_proposed`` runs the narrow-band local-region flow with the optional
shape constraint. ``evolve_cv`` and ``evolve_drlse`` are the two baselines
(global two-phase Chan-Vese, and edge-based distance regularized evolution).
"""
import enum
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage as ndi

from .energies import (
    ModelParams,
    energy_total,
    local_stats,
    regularizer_gradient,
    shape_penalty_field,
)
from .grid import (
    DegenerateFieldError,
    as_grid,
    box_sum,
    check_evolver_size,
    check_same_shape,
    curvature_field,
    dirac_smoothed,
    heaviside_smoothed,
    reinitialize,
)

log = logging.getLogger(__name__)

CFL_LIMIT = 1.0
WINDOW = 10
# DRLSE fronts creep towards edges by about a pixel per ten iterations
DRLSE_AREA_WINDOW = 50


class StopReason(str, enum.Enum):
    TOLERANCE = "tolerance"
    MAX_ITERS = "max_iters"
    DEGENERATE = "degenerate_field"


@dataclass
class EvolutionReport:
    """Outcome of one evolution run.

    ``energy_trace[0]`` is the energy of the initial field, followed by one
    entry per iteration.
    """

    iterations_run: int = 0
    final_energy: float = float("nan")
    energy_trace: list = field(default_factory=list)
    converged: bool = False
    stop_reason: StopReason = StopReason.MAX_ITERS

    def to_dict(self):
        return {
            "iterations_run": self.iterations_run,
            "final_energy": self.final_energy,
            "converged": self.converged,
            "stop_reason": self.stop_reason.value,
            "energy_trace": list(self.energy_trace),
        }


@dataclass
class CvParams:
    nu: float = 650.25
    lambda1: float = 1.0
    lambda2: float = 1.0
    eps: float = 0.01
    dt: float = 0.1
    max_iters: int = 200
    convergence_tol: float = 1e-4
    reinit_every: int = 20
    # the arc-length weight is quoted for 8-bit intensities
    intensity_scale: float = 255.0


@dataclass
class DrlseParams:
    dt: float = 1.0
    mu: float = 0.2
    lam: float = 5.0
    alpha: float = -3.0
    sigma: float = 1.5
    eps: float = 1.5
    c0: float = 2.0
    max_iters: int = 1000
    convergence_tol: float = 1e-4
    intensity_scale: float = 255.0


def _check_field(phi):
    if not np.all(np.isfinite(phi)):
        raise DegenerateFieldError("non-finite values in level-set field")
    inside = phi > 0
    if not inside.any() or inside.all():
        raise DegenerateFieldError("contour vanished")


def _converged(trace, tol, window=WINDOW):
    if len(trace) <= window:
        return False
    ref = trace[-window - 1]
    return abs(trace[-1] - ref) < tol * abs(ref)


def _cfl_step(phi, update, dt):
    peak = float(np.max(np.abs(update))) * dt
    if peak > CFL_LIMIT:
        dt *= CFL_LIMIT / peak
    return phi + dt * update


# --- proposed model -------------------------------------------------------

def local_force(image, phi, stats, params):
    """Descent direction of the local-region energy, restricted to the band.

    Pixel ``p`` collects ``(I(p) - v(x))^2 - (I(p) - u(x))^2`` from every band
    pixel ``x`` whose patch contains it, weighted by ``delta(phi(p))``. This
    is the exact negative derivative of the discrete local energy for fixed
    means.
    """
    band = stats.band.astype(np.float64)
    u, v = stats.u, stats.v
    s1 = box_sum(band * (u - v), params.patch_radius)
    s2 = box_sum(band * (v * v - u * u), params.patch_radius)
    delta = dirac_smoothed(phi, params.heaviside_eps)
    return np.where(stats.band, delta * (2.0 * image * s1 + s2), 0.0)


def proposed_update(image, phi, stats, bs, params):
    """Right-hand side of the gradient flow (before multiplying by ``dt``)."""
    delta = dirac_smoothed(phi, params.heaviside_eps)
    upd = np.zeros_like(phi)
    if params.omega1:
        upd += params.omega1 * local_force(image, phi, stats, params)
    if bs is not None and params.omega2:
        upd -= params.omega2 * delta * bs
    if params.omega3:
        upd -= params.omega3 * regularizer_gradient(phi, params.heaviside_eps)
    return upd


def step_proposed(image, phi, stats, bs, params):
    """One explicit Euler step; ``dt`` shrinks so no pixel moves more than 1."""
    upd = proposed_update(image, phi, stats, bs, params)
    if not np.all(np.isfinite(upd)):
        raise DegenerateFieldError("non-finite update")
    return _cfl_step(phi, upd, params.dt)


def evolve_proposed(image, phi0, previous_contour=None, params=None):
    """Iterate :func:`step_proposed` until convergence or the iteration budget.

    ``previous_contour`` is a boolean boundary mask from the coarser scale;
    without it the shape term is left out.
    """
    params = params or ModelParams()
    img = as_grid(image, "image")
    phi = as_grid(phi0, "phi0").copy()
    check_same_shape(img, phi)
    check_evolver_size(img)
    bs = None
    if previous_contour is not None:
        check_same_shape(img, previous_contour)
        bs = shape_penalty_field(previous_contour, params.r_s)

    def energy(ph, st):
        return energy_total(img, ph, params, shape_field=bs, stats=st)

    report = EvolutionReport()
    stats = local_stats(img, phi, params)
    report.energy_trace.append(energy(phi, stats))
    for it in range(params.max_iters_per_scale):
        try:
            new = step_proposed(img, phi, stats, bs, params)
            _check_field(new)
            if (it + 1) % params.reinit_every == 0:
                new = reinitialize(new)
        except DegenerateFieldError as exc:
            log.warning("proposed evolution stopped at iteration %d: %s", it, exc)
            report.stop_reason = StopReason.DEGENERATE
            break
        phi = new
        stats = local_stats(img, phi, params)
        report.iterations_run = it + 1
        report.energy_trace.append(energy(phi, stats))
        if _converged(report.energy_trace, params.convergence_tol):
            report.converged = True
            report.stop_reason = StopReason.TOLERANCE
            break
    report.final_energy = report.energy_trace[-1]
    return phi, report


# --- Chan-Vese baseline ---------------------------------------------------

def cv_energy(image, phi, u1, u2, params):
    hv = heaviside_smoothed(phi, params.eps)
    gy, gx = np.gradient(hv)
    length = np.sum(np.sqrt(gx * gx + gy * gy))
    fit = (params.lambda1 * np.sum((image - u1) ** 2 * hv)
           + params.lambda2 * np.sum((image - u2) ** 2 * (1.0 - hv)))
    return float(params.nu * length + fit)


def _cv_means(image, phi):
    inside = phi > 0
    return float(image[inside].mean()), float(image[~inside].mean())


def evolve_cv(image, phi0, params=None):
    """Two-phase Chan-Vese with global means recomputed every iteration."""
    params = params or CvParams()
    img = as_grid(image, "image") * params.intensity_scale
    phi = as_grid(phi0, "phi0").copy()
    check_same_shape(img, phi)
    check_evolver_size(img)
    _check_field(phi)

    report = EvolutionReport()
    u1, u2 = _cv_means(img, phi)
    report.energy_trace.append(cv_energy(img, phi, u1, u2, params))
    for it in range(params.max_iters):
        delta = dirac_smoothed(phi, params.eps)
        upd = delta * (params.nu * curvature_field(phi)
                       - params.lambda1 * (img - u1) ** 2
                       + params.lambda2 * (img - u2) ** 2)
        try:
            new = _cfl_step(phi, upd, params.dt)
            _check_field(new)
            if (it + 1) % params.reinit_every == 0:
                new = reinitialize(new)
        except DegenerateFieldError as exc:
            log.warning("C-V evolution stopped at iteration %d: %s", it, exc)
            report.stop_reason = StopReason.DEGENERATE
            break
        phi = new
        u1, u2 = _cv_means(img, phi)
        report.iterations_run = it + 1
        report.energy_trace.append(cv_energy(img, phi, u1, u2, params))
        if _converged(report.energy_trace, params.convergence_tol):
            report.converged = True
            report.stop_reason = StopReason.TOLERANCE
            break
    report.final_energy = report.energy_trace[-1]
    return phi, report


# --- DRLSE baseline -------------------------------------------------------
# Internally the field is negative inside, as in the original formulation;
# callers see the usual positive-inside convention.

def edge_indicator(image, sigma):
    smooth = ndi.gaussian_filter(image, sigma, mode="nearest")
    gy, gx = np.gradient(smooth)
    return 1.0 / (1.0 + gx * gx + gy * gy)


def _neumann(psi):
    psi = psi.copy()
    psi[[0, 0, -1, -1], [0, -1, 0, -1]] = psi[[2, 2, -3, -3], [2, -3, 2, -3]]
    psi[[0, -1], 1:-1] = psi[[2, -3], 1:-1]
    psi[1:-1, [0, -1]] = psi[1:-1, [2, -3]]
    return psi


def _div(fx, fy):
    return np.gradient(fx, axis=1) + np.gradient(fy, axis=0)


def _compact_dirac(psi, eps):
    d = (1.0 / (2.0 * eps)) * (1.0 + np.cos(np.pi * psi / eps))
    return np.where(np.abs(psi) <= eps, d, 0.0)


def _compact_heaviside(psi, eps):
    h = 0.5 * (1.0 + psi / eps + np.sin(np.pi * psi / eps) / np.pi)
    return np.where(psi > eps, 1.0, np.where(psi < -eps, 0.0, h))


def _double_well_dps(s):
    # p'(s)/s for the double-well potential
    ps = np.where(s <= 1.0, np.sin(2.0 * np.pi * s) / (2.0 * np.pi), s - 1.0)
    num = np.where(ps != 0, ps, 1.0)
    den = np.where(s != 0, s, 1.0)
    return num / den


def _double_well(s):
    return np.where(s <= 1.0, (1.0 - np.cos(2.0 * np.pi * s)) / (2.0 * np.pi) ** 2,
                    0.5 * (s - 1.0) ** 2)


def drlse_energy(psi, g, params):
    gy, gx = np.gradient(psi)
    s = np.sqrt(gx * gx + gy * gy)
    reg = np.sum(_double_well(s))
    length = np.sum(g * _compact_dirac(psi, params.eps) * s)
    area = np.sum(g * _compact_heaviside(-psi, params.eps))
    return float(params.mu * reg + params.lam * length + params.alpha * area)


def evolve_drlse(image, phi0, params=None):
    """Distance regularized level set evolution from ``phi0``'s interior.

    ``phi0`` only contributes its sign: it is turned into a binary step of
    height ``c0``. A negative ``alpha`` makes the contour expand.
    """
    params = params or DrlseParams()
    img = as_grid(image, "image") * params.intensity_scale
    phi0 = as_grid(phi0, "phi0")
    check_same_shape(img, phi0)
    check_evolver_size(img)
    _check_field(phi0)
    psi = np.where(phi0 > 0, -params.c0, params.c0).astype(np.float64)
    g = edge_indicator(img, params.sigma)
    gy_g, gx_g = np.gradient(g)

    report = EvolutionReport()
    report.energy_trace.append(drlse_energy(psi, g, params))
    areas = [float(np.count_nonzero(psi < 0))]
    for it in range(params.max_iters):
        psi = _neumann(psi)
        py, px = np.gradient(psi)
        s = np.sqrt(px * px + py * py)
        nx = px / (s + 1e-10)
        ny = py / (s + 1e-10)
        dps = _double_well_dps(s)
        dist_reg = _div(dps * px - px, dps * py - py) + ndi.laplace(psi, mode="nearest")
        dirac = _compact_dirac(psi, params.eps)
        area = dirac * g
        edge = dirac * (gx_g * nx + gy_g * ny) + dirac * g * _div(nx, ny)
        new = psi + params.dt * (params.mu * dist_reg + params.lam * edge
                                 + params.alpha * area)
        try:
            _check_field(-new)
        except DegenerateFieldError as exc:
            log.warning("DRLSE evolution stopped at iteration %d: %s", it, exc)
            report.stop_reason = StopReason.DEGENERATE
            break
        psi = new
        report.iterations_run = it + 1
        report.energy_trace.append(drlse_energy(psi, g, params))
        areas.append(float(np.count_nonzero(psi < 0)))
        # the balloon term dominates the energy, so convergence is judged on the area
        if _converged(areas, params.convergence_tol, DRLSE_AREA_WINDOW):
            report.converged = True
            report.stop_reason = StopReason.TOLERANCE
            break
    report.final_energy = report.energy_trace[-1]
    return -psi, report

