"""FBP-type reconstruction of smoothed gradients.

Two equivalent routes are provided:

* ``preprocess``: filter the sinogram with ``theta_j(phi) * k_eps(s)`` and
  invert with ordinary filtered backprojection;
* ``combined``: a single angle-weighted filter ``theta_j(phi) * w_eps``
  that folds the ramp into the Gaussian derivative, followed by one
  backprojection.

The ramp responses are normalized for a backprojection over the full circle
of directions, ``int_0^{2 pi}``.  A filtered parallel-beam sinogram satisfies
``g(phi + pi, -s) = g(phi, s)``, so that integral is twice
:func:`~ctgrad.projector.backproject`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import GradientField, GridSpec, ImageGrid, Sinogram
from .filters import convolve_s, g_detector_kernel, next_pow2, ramlak_filter, w_filter
from .projector import backproject

__all__ = [
    "fbp_n_fft",
    "full_circle_backproject",
    "fbp_reconstruct",
    "method1_gradient_preprocess",
    "method1_gradient_combined",
]


def fbp_n_fft(n_s: int) -> int:
    """Padded FFT length for frequency-domain filtering (>= 2 n_s, power of two)."""
    return next_pow2(2 * n_s)


def full_circle_backproject(sino: Sinogram, grid_spec: GridSpec) -> ImageGrid:
    half = backproject(sino, grid_spec)
    return ImageGrid(2.0 * half.data, half.pixel_size)


def fbp_reconstruct(sino: Sinogram, grid_spec: GridSpec, cutoff_fraction: float = 1.0) -> ImageGrid:
    """Ram-Lak filtered backprojection."""
    ramp = ramlak_filter(fbp_n_fft(sino.n_s), sino.s_spacing, cutoff_fraction)
    return full_circle_backproject(convolve_s(sino, ramp), grid_spec)


def _both_components(fn, threads):
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            gx, gy = pool.map(fn, (1, 2))
    else:
        gx, gy = fn(1), fn(2)
    return GradientField(gx, gy)


def method1_gradient_preprocess(
    sino: Sinogram,
    eps: float,
    grid_spec: GridSpec,
    cutoff_fraction: float = 1.0,
    threads: int | None = None,
) -> GradientField:
    """``d f_eps / d x_j = FBP[Rf *_s G_{eps,j}]``; ``eps`` is a physical length."""
    kernel = g_detector_kernel(eps, sino.s_spacing)

    def component(j):
        rhs = convolve_s(sino, kernel, sino.angle_set.theta(j))
        return fbp_reconstruct(rhs, grid_spec, cutoff_fraction)

    return _both_components(component, threads)


def method1_gradient_combined(
    sino: Sinogram,
    eps: float,
    grid_spec: GridSpec,
    threads: int | None = None,
) -> GradientField:
    """``d f_eps / d x_j = B[Rf *_s W_{eps,j}]`` with the combined filter."""
    filt = w_filter(eps, fbp_n_fft(sino.n_s), sino.s_spacing)
    # filter once, weight per component
    filtered = convolve_s(sino, filt)

    def component(j):
        weighted = filtered.with_data(filtered.data * sino.angle_set.theta(j)[:, None])
        return full_circle_backproject(weighted, grid_spec)

    return _both_components(component, threads)
