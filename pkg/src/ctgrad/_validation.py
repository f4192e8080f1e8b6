"""Input coercion shared by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .core import AngleSet, DetectorGrid, GeometryError, GradientField, GridSpec, Sinogram


def check_sinogram(X, angles=None, s_spacing: float = 1.0) -> Sinogram:
    """Return ``X`` as a :class:`Sinogram`.

    Plain 2D arrays are accepted with angles defaulting to ``k * pi / n_rows``
    and the given detector spacing.
    """
    if isinstance(X, Sinogram):
        return X
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a Sinogram or 2D array, got array with ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sinogram contains NaN or infinite values")
    angle_set = AngleSet.even(arr.shape[0]) if angles is None else AngleSet(angles)
    return Sinogram(arr, angle_set, DetectorGrid(arr.shape[1], s_spacing))


def largest_covered_size(detector: DetectorGrid, pixel_size: float) -> int:
    """Largest ``n`` whose ``n x n`` grid fits inside the detector's coverage."""
    n = int(np.floor(2 * detector.half_width / (np.sqrt(2.0) * pixel_size) + 1e-9))
    if n < 2:
        raise GeometryError("detector too narrow for any image at this pixel size")
    return n


def check_grid_spec(sino: Sinogram, size=None, pixel_size=None) -> GridSpec:
    """Resolve the reconstruction grid; pixel size defaults to the detector spacing."""
    px = sino.s_spacing if pixel_size is None else float(pixel_size)
    n = largest_covered_size(sino.detector, px) if size is None else size
    spec = GridSpec(n, px)
    sino.detector.check_covers(spec)
    return spec


def check_gradient_field(X, pixel_size: float = 1.0) -> GradientField:
    if isinstance(X, GradientField):
        return X
    if isinstance(X, (tuple, list)) and len(X) == 2:
        return GradientField.from_arrays(X[0], X[1], pixel_size)
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[0] == 2:
        return GradientField.from_arrays(arr[0], arr[1], pixel_size)
    raise ValueError("expected a GradientField, a (gx, gy) pair, or an array of shape (2, n, n)")

