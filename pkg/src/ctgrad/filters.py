"""Gaussian-derivative kernels and detector-axis filters.

Angle-dependent detector filters separate into ``theta_j(phi) * h(s)``, so
every filter here is angle-free; the per-angle factor is passed to
:func:`convolve_s` as a weight vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GeometryError, Sinogram

__all__ = [
    "Filter1D",
    "gaussian_kernel_2d",
    "dgauss_image_kernel",
    "g_detector_kernel",
    "convolve_s",
    "next_pow2",
    "fft_frequencies",
    "ramlak_filter",
    "w_filter",
    "TRUNCATION",
]

# kernels are truncated at this many standard deviations
TRUNCATION = 4.0


@dataclass(frozen=True)
class Filter1D:
    """Detector-axis filter, given either as a spatial kernel or a frequency response.

    Spatial kernels have odd length and are centered at ``(len - 1) // 2``;
    they already include the ``sample_spacing`` quadrature factor.  Frequency
    responses are sampled on the ``n_fft`` DFT bins of :func:`fft_frequencies`.
    """

    sample_spacing: float
    kernel: np.ndarray | None = None
    response: np.ndarray | None = None

    def __post_init__(self):
        if (self.kernel is None) == (self.response is None):
            raise ValueError("give exactly one of kernel or response")
        if self.kernel is not None:
            k = np.array(self.kernel, dtype=np.float64)
            if k.ndim != 1 or k.size % 2 != 1:
                raise ValueError(f"spatial kernel must be 1D with odd length, got shape {k.shape}")
            k.setflags(write=False)
            object.__setattr__(self, "kernel", k)
        else:
            r = np.array(self.response, dtype=np.complex128)
            if r.ndim != 1:
                raise ValueError("frequency response must be 1D")
            r.setflags(write=False)
            object.__setattr__(self, "response", r)

    @property
    def is_spatial(self) -> bool:
        return self.kernel is not None

    @property
    def n_fft(self) -> int:
        if self.response is None:
            raise AttributeError("spatial filters have no n_fft")
        return self.response.size

    @property
    def frequencies(self) -> np.ndarray:
        return fft_frequencies(self.n_fft, self.sample_spacing)

    def impulse_response(self) -> np.ndarray:
        """Spatial samples of a frequency filter, in FFT (wrapped) order."""
        return np.fft.ifft(self.response)


def _check_eps(eps):
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps}")


def _offsets(eps, spacing):
    half = int(np.ceil(TRUNCATION * eps / spacing))
    return np.arange(-half, half + 1) * spacing


def gaussian_kernel_2d(eps: float, pixel_size: float) -> np.ndarray:
    """Sampled ``g_eps`` times ``pixel_size**2`` on a ``(2m+1)^2`` stencil, ``m = ceil(4 eps / h)``."""
    _check_eps(eps)
    t = _offsets(eps, pixel_size)
    r2 = t[:, None] ** 2 + t[None, :] ** 2
    return np.exp(-r2 / (2 * eps**2)) / (2 * np.pi * eps**2) * pixel_size**2


def dgauss_image_kernel(eps: float, pixel_size: float, j: int) -> np.ndarray:
    """Sampled ``d g_eps / d x_j`` in image-array orientation, times ``pixel_size**2``.

    Rows point along -x2, so the ``j=2`` kernel is the negated transpose of
    the ``j=1`` kernel.  Convolving an image with this kernel (zero padded)
    gives ``f * d g_eps / d x_j``.
    """
    _check_eps(eps)
    t = _offsets(eps, pixel_size)
    x1 = t[None, :]
    x2 = -t[:, None]
    g = np.exp(-(x1**2 + x2**2) / (2 * eps**2)) / (2 * np.pi * eps**2)
    if j == 1:
        coord = x1
    elif j == 2:
        coord = x2
    else:
        raise ValueError(f"component index must be 1 or 2, got {j}")
    return -(coord / eps**2) * g * pixel_size**2


def g_detector_kernel(eps: float, s_spacing: float) -> Filter1D:
    """Angle-free factor ``k(s) = -s exp(-s^2 / (2 eps^2)) / (eps^3 sqrt(2 pi))``.

    ``G_j(phi, s) = theta_j(phi) * k(s)``.  Sampled on ``[-4 eps, 4 eps]``
    and scaled by ``s_spacing``.
    """
    _check_eps(eps)
    s = _offsets(eps, s_spacing)
    k = -s * np.exp(-(s**2) / (2 * eps**2)) / (eps**3 * np.sqrt(2 * np.pi))
    return Filter1D(s_spacing, kernel=k * s_spacing)


def next_pow2(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


def fft_frequencies(n_fft: int, spacing: float) -> np.ndarray:
    """Angular DFT bin frequencies ``2 pi m / (n_fft * spacing)``, Nyquist on the + side."""
    m = np.fft.fftfreq(n_fft) * n_fft
    if n_fft % 2 == 0:
        m[n_fft // 2] = n_fft // 2
    return 2 * np.pi * m / (n_fft * spacing)


def _hermitize(response: np.ndarray) -> np.ndarray:
    # a real filter needs a real Nyquist bin; odd responses have zero there
    out = response.astype(np.complex128)
    if out.size % 2 == 0:
        out[out.size // 2] = out[out.size // 2].real
    return out


def ramlak_filter(n_fft: int, s_spacing: float, cutoff_fraction: float = 1.0) -> Filter1D:
    """Ramp ``|w| / (4 pi)``, zeroed above ``cutoff_fraction`` of Nyquist."""
    if n_fft < 2 or n_fft & (n_fft - 1):
        raise ValueError(f"n_fft must be a power of two, got {n_fft}")
    if not 0 < cutoff_fraction <= 1:
        raise ValueError(f"cutoff_fraction must be in (0, 1], got {cutoff_fraction}")
    w = fft_frequencies(n_fft, s_spacing)
    nyquist = np.pi / s_spacing
    h = np.abs(w) / (4 * np.pi)
    h[np.abs(w) > cutoff_fraction * nyquist * (1 + 1e-12)] = 0.0
    return Filter1D(s_spacing, response=h.astype(np.complex128))


def w_filter(eps: float, n_fft: int, s_spacing: float) -> Filter1D:
    """Combined ramp and Gaussian-derivative response ``i w |w| exp(-eps^2 w^2 / 2) / (4 pi)``."""
    _check_eps(eps)
    w = fft_frequencies(n_fft, s_spacing)
    resp = 1j * w * np.abs(w) * np.exp(-(eps**2) * w**2 / 2) / (4 * np.pi)
    return Filter1D(s_spacing, response=_hermitize(resp))


def _row_weights(per_angle_weights, n_angles):
    if per_angle_weights is None:
        return np.ones(n_angles)
    weights = np.asarray(per_angle_weights, dtype=np.float64)
    if weights.shape != (n_angles,):
        raise GeometryError(
            f"need one weight per angle ({n_angles}), got shape {weights.shape}"
        )
    return weights


def convolve_s(sino: Sinogram, filt: Filter1D, per_angle_weights=None) -> Sinogram:
    """Row-wise ``weight_k * (row_k * filter)`` along the detector axis.

    Spatial kernels use zero-padded FFT convolution (size: next power of two
    >= ``n_s + len - 1``) and return the centered ``n_s`` samples.  Frequency
    filters are applied by padding each row to ``filt.n_fft``.
    """
    if not np.isclose(filt.sample_spacing, sino.s_spacing, rtol=1e-9):
        raise GeometryError(
            f"filter spacing {filt.sample_spacing:g} != detector spacing {sino.s_spacing:g}"
        )
    weights = _row_weights(per_angle_weights, sino.n_angles)
    n_s = sino.n_s
    rows = sino.data

    if filt.is_spatial:
        klen = filt.kernel.size
        n_fft = next_pow2(n_s + klen - 1)
        spec = np.fft.rfft(rows, n_fft, axis=1) * np.fft.rfft(filt.kernel, n_fft)
        full = np.fft.irfft(spec, n_fft, axis=1)
        c = (klen - 1) // 2
        out = full[:, c : c + n_s]
    else:
        if filt.n_fft < n_s:
            raise GeometryError(f"n_fft={filt.n_fft} shorter than detector n_s={n_s}")
        spec = np.fft.fft(rows, filt.n_fft, axis=1) * filt.response[None, :]
        out = np.fft.ifft(spec, axis=1).real[:, :n_s]

    return sino.with_data(out * weights[:, None])
