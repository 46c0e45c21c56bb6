"""Modal-regression loss, half-quadratic weights, Parzen density, mode seeking.

The loss on a residual vector e is sum_i (1 - K(e_i)) with K a unit-peak
Gaussian exp(-e^2 / (2 sigma^2)); it is zero exactly at e = 0 and approaches
one per coordinate for large residuals, which is what makes the regression
insensitive to gross errors.  Density estimation keeps the area-normalized
kernels so that Parzen estimates integrate to one.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyInput, UnsupportedKernel
from .numkit import as_vector

GAUSSIAN = "gaussian"
EPANECHNIKOV = "epanechnikov"


@dataclass(frozen=True)
class Kernel:
    """Smoothing kernel; sigma is the Gaussian bandwidth (ignored otherwise)."""

    kind: str
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in (GAUSSIAN, EPANECHNIKOV):
            raise UnsupportedKernel(f"unknown kernel kind {self.kind!r}")
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")

    @classmethod
    def gaussian(cls, sigma=1.0):
        return cls(GAUSSIAN, float(sigma))

    @classmethod
    def epanechnikov(cls):
        return cls(EPANECHNIKOV)


@dataclass(frozen=True)
class ModalLoss:
    """Gaussian modal-regression loss with fixed or residual-adaptive bandwidth.

    With ``adaptive_bandwidth`` the solver refreshes sigma once per outer
    iteration from the current residual, flooring it at ``min_sigma`` (when
    None, the solver derives a floor from the scale of y).  The kernel's own
    sigma is the fixed bandwidth in the non-adaptive case.
    """

    kernel: Kernel = Kernel(GAUSSIAN, 1.0)
    adaptive_bandwidth: bool = False
    min_sigma: float | None = None

    def __post_init__(self):
        if self.kernel.kind != GAUSSIAN:
            raise UnsupportedKernel(
                "modal loss requires the Gaussian kernel; the Epanechnikov "
                "kernel has no half-quadratic weight function here"
            )
        if self.min_sigma is not None and not (self.min_sigma > 0.0):
            raise ValueError(f"min_sigma must be positive, got {self.min_sigma}")

    @classmethod
    def fixed(cls, sigma):
        return cls(Kernel.gaussian(sigma))

    @classmethod
    def adaptive(cls, min_sigma=None):
        return cls(Kernel.gaussian(1.0), True, min_sigma)

    def resolve_sigma(self, e):
        """Bandwidth this loss would use on residual vector e."""
        if not self.adaptive_bandwidth:
            return self.kernel.sigma
        floor = self.min_sigma if self.min_sigma is not None else 1e-12
        return adaptive_sigma(e, floor)


@dataclass(frozen=True)
class HQState:
    """Half-quadratic auxiliary state: weights in (0, 1] and the bandwidth."""

    weights: np.ndarray
    sigma: float

    def __post_init__(self):
        w = as_vector(self.weights, "weights")
        if w.size and (np.min(w) <= 0.0 or np.max(w) > 1.0):
            raise ValueError("half-quadratic weights must lie in (0, 1]")
        if not (self.sigma > 0.0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "weights", w)


def kernel_eval(kernel, e):
    """Pointwise kernel value: unit-peak Gaussian or (3/4)(1 - e^2)+."""
    e = np.asarray(e, dtype=np.float64)
    if kernel.kind == GAUSSIAN:
        out = np.exp(-(e * e) / (2.0 * kernel.sigma * kernel.sigma))
    else:
        out = 0.75 * np.maximum(1.0 - e * e, 0.0)
    return float(out) if out.ndim == 0 else out


def _density_eval(kernel, u):
    # Area-normalized forms used by the Parzen estimator.
    if kernel.kind == GAUSSIAN:
        s = kernel.sigma
        return np.exp(-(u * u) / (2.0 * s * s)) / (math.sqrt(2.0 * math.pi) * s)
    return 0.75 * np.maximum(1.0 - u * u, 0.0)


def _loss_kernel(loss, e, sigma):
    if isinstance(loss, Kernel):
        return loss if sigma is None else replace(loss, sigma=float(sigma))
    if sigma is None:
        sigma = loss.resolve_sigma(e)
    return Kernel.gaussian(sigma)


def _mrlf_raw(e, sigma):
    # unvalidated Gaussian loss value, shared with the solver's hot loop
    return float(np.sum(1.0 - np.exp(-(e * e) / (2.0 * sigma * sigma))))


def mrlf(loss, e, sigma=None):
    """Modal-regression loss sum_i (1 - K(e_i)).

    ``loss`` is a ModalLoss or a bare Kernel; an explicit ``sigma`` overrides
    the bandwidth either would use.
    """
    e = as_vector(e, "residual")
    k = _loss_kernel(loss, e, sigma)
    return float(np.sum(1.0 - kernel_eval(k, e)))


def hq_weights(loss, e, sigma=None):
    """Half-quadratic weights exp(-e^2 / (2 sigma^2)), elementwise in (0, 1].

    These equal the Gaussian kernel values at the residuals; the weighted
    ridge step of the solver uses them scaled by 1/sigma^2.
    """
    e = as_vector(e, "residual")
    k = _loss_kernel(loss, e, sigma)
    if k.kind != GAUSSIAN:
        raise UnsupportedKernel("half-quadratic weights exist only for the Gaussian kernel")
    return kernel_eval(k, e)


def adaptive_sigma(e, min_sigma):
    """Residual-driven bandwidth max(min_sigma, sqrt(||e||^2 / (2m)))."""
    e = as_vector(e, "residual")
    if e.size == 0:
        raise EmptyInput("adaptive bandwidth needs at least one residual")
    if not (min_sigma > 0.0):
        raise ValueError(f"min_sigma must be positive, got {min_sigma}")
    return float(max(min_sigma, math.sqrt(float(e @ e) / (2.0 * e.size))))


def default_sigma_floor(y):
    """Scale-aware lower bound for the adaptive bandwidth: 1e-4 (1 + ||y||/sqrt(m))."""
    y = as_vector(y, "y")
    if y.size == 0:
        raise EmptyInput("empty target vector")
    return 1e-4 * (1.0 + float(np.linalg.norm(y)) / math.sqrt(y.size))


def parzen_density(kernel, samples, t):
    """Parzen estimate (1/m) sum_i K(t - e_i) with the area-normalized kernel.

    ``t`` may be a scalar or an array of evaluation points.
    """
    samples = as_vector(samples, "samples")
    if samples.size == 0:
        raise EmptyInput("density estimation needs at least one sample")
    t_arr = np.asarray(t, dtype=np.float64)
    diffs = np.atleast_1d(t_arr)[:, None] - samples[None, :]
    dens = np.mean(_density_eval(kernel, diffs), axis=1)
    return float(dens[0]) if t_arr.ndim == 0 else dens


def estimate_mode(kernel, samples, grid_points=512, grid_range=None):
    """Mode of the Parzen density: coarse grid argmax plus ternary refinement.

    The grid spans [min(samples), max(samples)] unless ``grid_range`` widens
    it; a range narrower than the sample span is rejected.
    """
    samples = as_vector(samples, "samples")
    if samples.size == 0:
        raise EmptyInput("mode estimation needs at least one sample")
    lo, hi = float(np.min(samples)), float(np.max(samples))
    if grid_range is not None:
        glo, ghi = float(grid_range[0]), float(grid_range[1])
        if glo > lo or ghi < hi:
            raise ValueError("grid range must cover the sample range")
        lo, hi = glo, ghi
    if lo == hi:
        return lo
    if grid_points < 3:
        raise ValueError("need at least 3 grid points")
    grid = np.linspace(lo, hi, int(grid_points))
    dens = parzen_density(kernel, samples, grid)
    best = int(np.argmax(dens))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]
    # ternary search for the maximum inside the winning cell
    span = b - a
    for _ in range(200):
        if b - a <= 1e-12 * max(1.0, span):
            break
        m1 = a + (b - a) / 3.0
        m2 = b - (b - a) / 3.0
        if parzen_density(kernel, samples, m1) < parzen_density(kernel, samples, m2):
            a = m1
        else:
            b = m2
    return 0.5 * (a + b)
