"""Pixel-driven parallel-beam Radon transform with an exactly matched adjoint.

Each pixel deposits ``value * pixel_size**2 / s_spacing`` onto the detector,
as a 3x3 grid of equal point masses; every point mass is split by linear
interpolation between the two bins bracketing its projection
``s = <x, theta(phi)>``.  The operator is stored as a sparse matrix,
so the adjoint is its transpose and ``<Rf, y> == <f, R^T y>`` holds to
rounding error.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .core import (
    AngleSet,
    DetectorGrid,
    GeometryError,
    GridSpec,
    ImageGrid,
    Sinogram,
    pixel_centers,
)

# point samples per pixel side; each pixel is splatted as SUBSAMPLES**2 points
SUBSAMPLES = 3

__all__ = [
    "RadonOperator",
    "radon_operator",
    "forward_radon",
    "adjoint_radon",
    "backproject",
]


class RadonOperator:
    """Discrete Radon transform for one (grid, angles, detector) geometry.

    ``forward`` maps an ``(n, n)`` array to an ``(n_angles, n_s)`` array and
    ``adjoint`` is its exact transpose.  Both accept and return plain arrays,
    which is what the iterative solvers consume.
    """

    def __init__(self, spec: GridSpec, angle_set: AngleSet, detector: DetectorGrid):
        detector.check_covers(spec)
        self.spec = spec
        self.angle_set = angle_set
        self.detector = detector
        self.matrix = _splat_matrix(spec, angle_set, detector)
        self._matrix_t = self.matrix.T.tocsr()

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.spec.shape

    @property
    def sino_shape(self) -> tuple[int, int]:
        return (len(self.angle_set), self.detector.n_s)

    @property
    def backprojection_scale(self) -> float:
        """Constant turning the transpose into the quadrature ``int_0^pi d phi``."""
        return (np.pi / len(self.angle_set)) * self.detector.s_spacing / self.spec.pixel_size**2

    def forward(self, image: np.ndarray) -> np.ndarray:
        return (self.matrix @ np.ravel(image)).reshape(self.sino_shape)

    def adjoint(self, sino: np.ndarray) -> np.ndarray:
        return (self._matrix_t @ np.ravel(sino)).reshape(self.image_shape)

    def backproject(self, sino: np.ndarray) -> np.ndarray:
        return self.backprojection_scale * self.adjoint(sino)


def _splat_matrix(
    spec: GridSpec, angle_set: AngleSet, detector: DetectorGrid, subsamples: int = SUBSAMPLES
) -> sp.csr_matrix:
    x1, x2 = pixel_centers(spec)
    x1 = x1.ravel()
    x2 = x2.ravel()
    n_pix = x1.size
    n_s = detector.n_s
    ds = detector.s_spacing
    offsets = (np.arange(subsamples) - (subsamples - 1) / 2.0) / subsamples * spec.pixel_size
    weight = spec.pixel_size**2 / ds / subsamples**2
    # widest footprint over all angles, in bins
    width = int(np.ceil(np.sqrt(2.0) * spec.pixel_size / ds)) + 2
    pix = np.arange(n_pix)

    blocks = []
    for k, phi in enumerate(angle_set.angles):
        c, s = np.cos(phi), np.sin(phi)
        centre = (x1 * c + x2 * s) / ds + (n_s - 1) / 2.0
        base = np.floor(centre).astype(np.int64) - width // 2
        acc = np.zeros((n_pix, width + 1))
        for ox in offsets:
            for oy in offsets:
                u = centre + (ox * c + oy * s) / ds
                i0 = np.floor(u).astype(np.int64)
                frac = u - i0
                slot = i0 - base
                acc[pix, slot] += weight * (1.0 - frac)
                acc[pix, slot + 1] += weight * frac
        bins = base[:, None] + np.arange(width + 1)[None, :]
        keep = acc != 0.0
        if np.any(bins[keep] < 0) or np.any(bins[keep] >= n_s):
            raise GeometryError("pixel projects outside the detector")
        blocks.append((k * n_s + bins[keep], np.broadcast_to(pix[:, None], acc.shape)[keep], acc[keep]))

    rows = np.concatenate([b[0] for b in blocks])
    cols = np.concatenate([b[1] for b in blocks])
    vals = np.concatenate([b[2] for b in blocks])
    shape = (len(angle_set) * n_s, n_pix)
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)


@lru_cache(maxsize=16)
def _cached_operator(n, pixel_size, angle_bytes, n_s, s_spacing) -> RadonOperator:
    angles = np.frombuffer(angle_bytes, dtype=np.float64)
    return RadonOperator(GridSpec(n, pixel_size), AngleSet(angles), DetectorGrid(n_s, s_spacing))


def radon_operator(spec: GridSpec, angle_set: AngleSet, detector: DetectorGrid) -> RadonOperator:
    """Return a (cached) :class:`RadonOperator` for the given geometry."""
    detector.check_covers(spec)
    return _cached_operator(
        spec.n, spec.pixel_size, angle_set.angles.tobytes(), detector.n_s, detector.s_spacing
    )


def forward_radon(img: ImageGrid, angles: AngleSet, detector: DetectorGrid) -> Sinogram:
    """Discrete approximation of ``Rf(phi, s) = int f(s theta + t theta_perp) dt``.

    Raises :class:`GeometryError` when the detector does not cover the
    circle circumscribing the image.
    """
    op = radon_operator(img.spec, angles, detector)
    return Sinogram(op.forward(img.data), angles, detector)


def _check_grid(sino: Sinogram, grid_spec: GridSpec) -> GridSpec:
    if not isinstance(grid_spec, GridSpec):
        raise GeometryError(f"grid_spec must be a GridSpec, got {type(grid_spec).__name__}")
    sino.detector.check_covers(grid_spec)
    return grid_spec


def adjoint_radon(sino: Sinogram, grid_spec: GridSpec) -> ImageGrid:
    """Exact transpose of :func:`forward_radon` on ``grid_spec``."""
    _check_grid(sino, grid_spec)
    op = radon_operator(grid_spec, sino.angle_set, sino.detector)
    return ImageGrid(op.adjoint(sino.data), grid_spec.pixel_size)


def backproject(sino: Sinogram, grid_spec: GridSpec) -> ImageGrid:
    """Quadrature backprojection ``Bg(x) = int_0^pi g(phi, <x, theta(phi)>) d phi``.

    Implemented as ``(pi / n_angles) * (s_spacing / pixel_size**2)`` times the
    adjoint, so a sinogram of ones backprojects to ``pi`` everywhere.
    """
    _check_grid(sino, grid_spec)
    op = radon_operator(grid_spec, sino.angle_set, sino.detector)
    return ImageGrid(op.backproject(sino.data), grid_spec.pixel_size)
