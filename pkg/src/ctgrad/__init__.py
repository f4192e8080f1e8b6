"""Smoothed image gradients and Canny edges reconstructed directly from CT sinograms."""

__version__ = "0.1.0"

from .core import (
    AngleSet,
    DetectorGrid,
    EdgeMap,
    GeometryError,
    GradientField,
    GridSpec,
    ImageGrid,
    Sinogram,
    gradient_magnitude,
)
from .edges import canny_from_gradient, edge_f1, hysteresis, nonmax_suppress
from .estimators import CannyEdgeDetector, FBPGradient, FBPReconstructor, L1Gradient
from .filters import (
    Filter1D,
    convolve_s,
    dgauss_image_kernel,
    g_detector_kernel,
    gaussian_kernel_2d,
    ramlak_filter,
    w_filter,
)
from .method1 import fbp_reconstruct, method1_gradient_combined, method1_gradient_preprocess
from .method2 import IstaConfig, estimate_lipschitz, ista, ista_solve, method2_gradient, soft_threshold
from .phantom import (
    EllipseSpec,
    add_noise,
    analytic_sinogram,
    rasterize,
    shepp_logan,
    subsample_angles,
)
from .projector import adjoint_radon, backproject, forward_radon

__all__ = [
    "AngleSet",
    "DetectorGrid",
    "EdgeMap",
    "GeometryError",
    "GradientField",
    "GridSpec",
    "ImageGrid",
    "Sinogram",
    "gradient_magnitude",
    "canny_from_gradient",
    "edge_f1",
    "hysteresis",
    "nonmax_suppress",
    "CannyEdgeDetector",
    "FBPGradient",
    "FBPReconstructor",
    "L1Gradient",
    "Filter1D",
    "convolve_s",
    "dgauss_image_kernel",
    "g_detector_kernel",
    "gaussian_kernel_2d",
    "ramlak_filter",
    "w_filter",
    "fbp_reconstruct",
    "method1_gradient_combined",
    "method1_gradient_preprocess",
    "IstaConfig",
    "estimate_lipschitz",
    "ista",
    "ista_solve",
    "method2_gradient",
    "soft_threshold",
    "EllipseSpec",
    "add_noise",
    "analytic_sinogram",
    "rasterize",
    "shepp_logan",
    "subsample_angles",
    "adjoint_radon",
    "backproject",
    "forward_radon",
]
