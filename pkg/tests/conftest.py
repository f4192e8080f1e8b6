import numpy as np
import pytest
from scipy.signal import fftconvolve

from ctgrad.core import AngleSet, DetectorGrid, GridSpec, pixel_centers
from ctgrad.filters import dgauss_image_kernel
from ctgrad.phantom import analytic_sinogram, disk_specs, rasterize, shepp_logan_specs
from ctgrad.projector import forward_radon

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def oracle_gradient(image, eps, j):
    """Image-domain ``f * d g_eps / d x_j`` with zero padding outside the grid."""
    return fftconvolve(image.data, dgauss_image_kernel(eps, image.pixel_size, j), mode="same")


def interior_mask(spec, border=3):
    """Inscribed circle minus a ``border``-pixel margin."""
    x1, x2 = pixel_centers(spec)
    return np.hypot(x1, x2) < (spec.n / 2 - border) * spec.pixel_size


def rel_l2(a, b, mask=None):
    a = np.asarray(a)
    b = np.asarray(b)
    if mask is not None:
        a, b = a[mask], b[mask]
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


class Scene:
    def __init__(self, kind, n=128, n_angles=180):
        self.spec = GridSpec(n, 1.0)
        self.detector = DetectorGrid.for_grid(self.spec)
        self.angles = AngleSet.even(n_angles)
        builder = {"disk": disk_specs, "shepp-logan": shepp_logan_specs}[kind]
        self.ellipses = builder(self.spec)
        self.image = rasterize(self.ellipses, self.spec)
        self.sino = forward_radon(self.image, self.angles, self.detector)

    def analytic(self):
        return analytic_sinogram(self.ellipses, self.angles, self.detector)


@pytest.fixture(scope="session")
def disk128():
    return Scene("disk")


@pytest.fixture(scope="session")
def disk128_sparse():
    return Scene("disk", n_angles=36)


@pytest.fixture(scope="session")
def shepp128():
    return Scene("shepp-logan")
