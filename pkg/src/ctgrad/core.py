"""Value types and geometry conventions shared by every module.

Physical coordinates are centered on the image: pixel ``(r, c)`` of an
``n x n`` grid has its center at

    x1 = (c - (n - 1) / 2) * pixel_size
    x2 = ((n - 1) / 2 - r) * pixel_size

so rows run along -x2 (image convention) and columns along +x1.  Every
module goes through :func:`pixel_centers` instead of redoing this mapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Raised when image, angle and detector geometries are inconsistent."""


def _frozen_array(data, shape=None, dtype=np.float64) -> np.ndarray:
    arr = np.array(data, dtype=dtype, copy=True)
    if shape is not None and arr.shape != shape:
        raise GeometryError(f"expected array of shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a square image grid without data."""

    n: int
    pixel_size: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise GeometryError(f"grid size must be an integer >= 2, got {self.n}")
        if not (self.pixel_size > 0 and np.isfinite(self.pixel_size)):
            raise GeometryError(f"pixel_size must be positive, got {self.pixel_size}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "pixel_size", float(self.pixel_size))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def fov(self) -> float:
        """Physical side length of the field of view."""
        return self.n * self.pixel_size

    @property
    def circumradius(self) -> float:
        """Radius of the circle circumscribing the image square."""
        return np.sqrt(2.0) * self.fov / 2.0


def pixel_centers(spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(x1, x2)`` arrays of physical pixel-center coordinates."""
    idx = np.arange(spec.n, dtype=np.float64) - (spec.n - 1) / 2.0
    x1 = idx[np.newaxis, :] * spec.pixel_size
    x2 = -idx[:, np.newaxis] * spec.pixel_size
    return np.broadcast_to(x1, spec.shape), np.broadcast_to(x2, spec.shape)


def physical_to_pixel(spec: GridSpec, x1, x2) -> tuple[np.ndarray, np.ndarray]:
    """Nearest pixel ``(row, col)`` for physical coordinates."""
    half = (spec.n - 1) / 2.0
    col = np.rint(np.asarray(x1) / spec.pixel_size + half).astype(int)
    row = np.rint(half - np.asarray(x2) / spec.pixel_size).astype(int)
    return row, col


@dataclass(frozen=True)
class ImageGrid:
    """Square-pixel scalar field centered on the physical origin."""

    data: np.ndarray
    pixel_size: float = 1.0

    def __post_init__(self):
        arr = _frozen_array(self.data)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise GeometryError(f"image data must be square 2D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        object.__setattr__(self, "data", arr)
        # validates n and pixel_size
        GridSpec(arr.shape[0], self.pixel_size)
        object.__setattr__(self, "pixel_size", float(self.pixel_size))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def spec(self) -> GridSpec:
        return GridSpec(self.n, self.pixel_size)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "ImageGrid":
        return cls(np.zeros(spec.shape), spec.pixel_size)


@dataclass(frozen=True)
class AngleSet:
    """Strictly increasing projection angles in ``[0, pi)``."""

    angles: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.angles)
        if arr.ndim != 1 or arr.size == 0:
            raise GeometryError("angles must be a non-empty 1D sequence")
        if np.any(arr < 0) or np.any(arr >= np.pi):
            raise GeometryError("angles must lie in [0, pi)")
        if np.any(np.diff(arr) <= 0):
            raise GeometryError("angles must be strictly increasing")
        object.__setattr__(self, "angles", arr)

    @classmethod
    def even(cls, n_angles: int) -> "AngleSet":
        """``phi_k = k * pi / n_angles`` for ``k = 0 .. n_angles - 1``."""
        if n_angles < 1:
            raise GeometryError("need at least one angle")
        return cls(np.arange(n_angles) * np.pi / n_angles)

    def __len__(self) -> int:
        return self.angles.size

    def theta(self, j: int) -> np.ndarray:
        """Component ``j`` (1 or 2) of the unit vector ``(cos phi, sin phi)``."""
        if j == 1:
            return np.cos(self.angles)
        if j == 2:
            return np.sin(self.angles)
        raise ValueError(f"component index must be 1 or 2, got {j}")


@dataclass(frozen=True)
class DetectorGrid:
    """Centered detector: ``s_i = (i - (n_s - 1) / 2) * s_spacing``."""

    n_s: int
    s_spacing: float = 1.0

    def __post_init__(self):
        if int(self.n_s) != self.n_s or self.n_s < 2:
            raise GeometryError(f"n_s must be an integer >= 2, got {self.n_s}")
        if not (self.s_spacing > 0 and np.isfinite(self.s_spacing)):
            raise GeometryError(f"s_spacing must be positive, got {self.s_spacing}")
        object.__setattr__(self, "n_s", int(self.n_s))
        object.__setattr__(self, "s_spacing", float(self.s_spacing))

    @property
    def s(self) -> np.ndarray:
        return (np.arange(self.n_s) - (self.n_s - 1) / 2.0) * self.s_spacing

    @property
    def half_width(self) -> float:
        return (self.n_s - 1) / 2.0 * self.s_spacing

    def covers(self, spec: GridSpec) -> bool:
        return self.half_width >= spec.circumradius * (1 - 1e-12)

    def check_covers(self, spec: GridSpec) -> None:
        if not self.covers(spec):
            raise GeometryError(
                f"detector half-width {self.half_width:g} does not cover the image "
                f"circumradius {spec.circumradius:g} (n={spec.n}, pixel_size={spec.pixel_size:g})"
            )

    @classmethod
    def for_grid(cls, spec: GridSpec, s_spacing: float | None = None) -> "DetectorGrid":
        """Smallest detector covering ``spec``.

        ``n_s`` grows by at least one per unit of ``n``, so the grid size can be
        recovered from the detector (see ``largest_covered_size``).
        """
        ds = spec.pixel_size if s_spacing is None else float(s_spacing)
        return cls(int(np.ceil(2 * spec.circumradius / ds - 1e-9)) + 1, ds)


@dataclass(frozen=True)
class Sinogram:
    """Angle-major array of line integrals, ``data[k, i] ~ Rf(phi_k, s_i)``."""

    data: np.ndarray
    angle_set: AngleSet
    detector: DetectorGrid

    def __post_init__(self):
        shape = (len(self.angle_set), self.detector.n_s)
        arr = _frozen_array(self.data, shape=shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("sinogram contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def angles(self) -> np.ndarray:
        return self.angle_set.angles

    @property
    def n_angles(self) -> int:
        return len(self.angle_set)

    @property
    def n_s(self) -> int:
        return self.detector.n_s

    @property
    def s_spacing(self) -> float:
        return self.detector.s_spacing

    def with_data(self, data) -> "Sinogram":
        return Sinogram(data, self.angle_set, self.detector)


@dataclass(frozen=True)
class GradientField:
    """Smoothed partial derivatives along x1 (``gx``) and x2 (``gy``)."""

    gx: ImageGrid
    gy: ImageGrid

    def __post_init__(self):
        if self.gx.n != self.gy.n or self.gx.pixel_size != self.gy.pixel_size:
            raise GeometryError("gradient components must share grid size and pixel size")

    @property
    def spec(self) -> GridSpec:
        return self.gx.spec

    @classmethod
    def from_arrays(cls, gx, gy, pixel_size: float = 1.0) -> "GradientField":
        return cls(ImageGrid(gx, pixel_size), ImageGrid(gy, pixel_size))


@dataclass(frozen=True)
class EdgeMap:
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise GeometryError(f"edge map must be square 2D, got shape {arr.shape}")
        if arr.dtype != bool:
            if not np.all((arr == 0) | (arr == 1)):
                raise ValueError("edge map values must be 0 or 1")
        object.__setattr__(self, "data", _frozen_array(arr, dtype=bool))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def count(self) -> int:
        return int(self.data.sum())


def gradient_magnitude(gf: GradientField) -> ImageGrid:
    """Per-pixel Euclidean norm ``sqrt(gx**2 + gy**2)``."""
    gx, gy = gf.gx.data, gf.gy.data
    return ImageGrid(np.sqrt(gx * gx + gy * gy), gf.gx.pixel_size)
