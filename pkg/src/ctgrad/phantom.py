"""Ellipse phantoms with closed-form sinograms, noise and angular subsampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AngleSet, DetectorGrid, GridSpec, ImageGrid, Sinogram, pixel_centers

__all__ = [
    "EllipseSpec",
    "SHEPP_LOGAN_TABLE",
    "shepp_logan_specs",
    "disk_specs",
    "ellipses_specs",
    "phantom_specs",
    "rasterize",
    "shepp_logan",
    "analytic_sinogram",
    "ellipse_outline",
    "add_noise",
    "subsample_angles",
]


@dataclass(frozen=True)
class EllipseSpec:
    """Constant-amplitude ellipse; ``a`` is the semi-axis along the rotated x1 axis."""

    center: tuple[float, float]
    a: float
    b: float
    rotation: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"semi-axes must be positive, got a={self.a}, b={self.b}")

    def scaled(self, factor: float) -> "EllipseSpec":
        cx, cy = self.center
        return EllipseSpec(
            (cx * factor, cy * factor), self.a * factor, self.b * factor, self.rotation, self.amplitude
        )

    def inside(self, x1, x2) -> np.ndarray:
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        dx = x1 - self.center[0]
        dy = x2 - self.center[1]
        u = dx * c + dy * s
        v = -dx * s + dy * c
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0


# Shepp & Logan (1974), original (not the high-contrast "modified") table, on the
# unit square [-1, 1]^2: amplitude, a, b, x0, y0, rotation in degrees.
SHEPP_LOGAN_TABLE = (
    (2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)


def _unit_to_physical(specs, spec: GridSpec):
    return [e.scaled(spec.fov / 2.0) for e in specs]


def shepp_logan_specs(spec: GridSpec) -> list[EllipseSpec]:
    unit = [
        EllipseSpec((x0, y0), a, b, np.deg2rad(rot), amp)
        for amp, a, b, x0, y0, rot in SHEPP_LOGAN_TABLE
    ]
    return _unit_to_physical(unit, spec)


def disk_specs(spec: GridSpec, radius_fraction: float = 0.25, amplitude: float = 1.0) -> list[EllipseSpec]:
    """Centered disk with radius ``radius_fraction * n * pixel_size``."""
    r = radius_fraction * spec.fov
    return [EllipseSpec((0.0, 0.0), r, r, 0.0, amplitude)]


def ellipses_specs(spec: GridSpec) -> list[EllipseSpec]:
    """Three disjoint ellipses of different contrast and orientation."""
    unit = [
        EllipseSpec((-0.35, 0.30), 0.28, 0.16, np.deg2rad(30.0), 1.0),
        EllipseSpec((0.30, 0.25), 0.15, 0.25, 0.0, 0.6),
        EllipseSpec((0.00, -0.40), 0.40, 0.14, np.deg2rad(-10.0), 0.8),
    ]
    return _unit_to_physical(unit, spec)


def phantom_specs(kind: str, spec: GridSpec) -> list[EllipseSpec]:
    builders = {"shepp-logan": shepp_logan_specs, "disk": disk_specs, "ellipses": ellipses_specs}
    try:
        return builders[kind](spec)
    except KeyError:
        raise ValueError(f"unknown phantom type {kind!r}; choose from {sorted(builders)}") from None


def rasterize(specs, spec: GridSpec) -> ImageGrid:
    """Pixel-center point sampling of a sum of ellipses."""
    x1, x2 = pixel_centers(spec)
    img = np.zeros(spec.shape)
    for e in specs:
        img[e.inside(x1, x2)] += e.amplitude
    return ImageGrid(img, spec.pixel_size)


def shepp_logan(n: int, pixel_size: float = 1.0) -> ImageGrid:
    if n < 32:
        raise ValueError(f"Shepp-Logan needs n >= 32, got {n}")
    spec = GridSpec(n, pixel_size)
    return rasterize(shepp_logan_specs(spec), spec)


def analytic_sinogram(specs, angles: AngleSet, detector: DetectorGrid) -> Sinogram:
    """Exact Radon transform of a sum of ellipses.

    For one ellipse, with ``s' = s - <c, theta>`` and
    ``r^2 = a^2 cos^2(phi - alpha) + b^2 sin^2(phi - alpha)``, the chord
    integral is ``2 A a b sqrt(r^2 - s'^2) / r^2`` for ``|s'| < r``.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one ellipse")
    phi = angles.angles[:, None]
    s = detector.s[None, :]
    out = np.zeros((len(angles), detector.n_s))
    for e in specs:
        shift = e.center[0] * np.cos(phi) + e.center[1] * np.sin(phi)
        psi = phi - e.rotation
        r2 = (e.a * np.cos(psi)) ** 2 + (e.b * np.sin(psi)) ** 2
        d2 = r2 - (s - shift) ** 2
        chord = np.where(d2 > 0, 2 * e.a * e.b * np.sqrt(np.clip(d2, 0, None)) / r2, 0.0)
        out += e.amplitude * chord
    return Sinogram(out, angles, detector)


def ellipse_outline(specs, spec: GridSpec) -> np.ndarray:
    """Boolean 1-px outline: inside pixels with a 4-neighbor outside, per ellipse."""
    x1, x2 = pixel_centers(spec)
    edges = np.zeros(spec.shape, dtype=bool)
    for e in specs:
        inside = e.inside(x1, x2)
        padded = np.pad(inside, 1, constant_values=False)
        interior = (
            padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
        )
        edges |= inside & ~interior
    return edges


def add_noise(sino: Sinogram, sigma_frac: float, seed: int = 0) -> Sinogram:
    """Additive Gaussian noise with std ``sigma_frac * max|sino|``."""
    if sigma_frac < 0:
        raise ValueError(f"sigma_frac must be >= 0, got {sigma_frac}")
    if sigma_frac == 0:
        return sino
    rng = np.random.default_rng(seed)
    sigma = sigma_frac * np.max(np.abs(sino.data))
    return sino.with_data(sino.data + rng.normal(0.0, sigma, size=sino.data.shape))


def subsample_angles(sino: Sinogram, keep_every: int) -> Sinogram:
    """Keep the rows whose angle index is a multiple of ``keep_every``."""
    if int(keep_every) != keep_every or keep_every < 1:
        raise ValueError(f"keep_every must be a positive integer, got {keep_every}")
    keep_every = int(keep_every)
    angles = AngleSet(sino.angles[::keep_every])
    return Sinogram(sino.data[::keep_every], angles, sino.detector)
