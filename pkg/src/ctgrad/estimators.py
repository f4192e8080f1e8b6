"""scikit-learn compatible wrappers.

The estimators take sinograms (or plain 2D arrays) and produce images,
gradient fields or edge maps, so they chain in a
:class:`sklearn.pipeline.Pipeline`::

    pipe = make_pipeline(L1Gradient(epsilon=2, lam=0.01, lam_mode="relative"),
                         CannyEdgeDetector(low=0.02, high=0.05))
    edges = pipe.fit_transform(sino)

``epsilon`` is given in pixels and converted with the grid's pixel size.
"""

from __future__ import annotations

import numbers

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, check_scalar

from ._validation import check_grid_spec, check_gradient_field, check_sinogram
from .core import GeometryError
from .edges import canny_from_gradient, edge_f1
from .method1 import fbp_reconstruct, method1_gradient_combined, method1_gradient_preprocess
from .method2 import IstaConfig, estimate_lipschitz, method2_gradient
from .projector import radon_operator

__all__ = ["FBPReconstructor", "FBPGradient", "L1Gradient", "CannyEdgeDetector"]


class _SinogramTransformer(TransformerMixin, BaseEstimator):
    def _fit_geometry(self, X):
        sino = check_sinogram(X)
        self.grid_spec_ = check_grid_spec(sino, self.size, self.pixel_size)
        self.n_angles_ = sino.n_angles
        self.n_s_ = sino.n_s
        return sino

    def _check_transform_input(self, X):
        check_is_fitted(self, "grid_spec_")
        sino = check_sinogram(X)
        if sino.n_s != self.n_s_:
            raise GeometryError(f"fitted on n_s={self.n_s_}, got n_s={sino.n_s}")
        return sino


class FBPReconstructor(_SinogramTransformer):
    """Ram-Lak filtered backprojection.

    Parameters
    ----------
    size : int, optional
        Output grid size; defaults to the largest grid the detector covers.
    pixel_size : float, optional
        Defaults to the detector spacing.
    cutoff : float
        Fraction of Nyquist kept by the ramp filter.
    """

    def __init__(self, size=None, pixel_size=None, cutoff=1.0):
        self.size = size
        self.pixel_size = pixel_size
        self.cutoff = cutoff

    def fit(self, X, y=None):
        check_scalar(self.cutoff, "cutoff", numbers.Real, min_val=0, max_val=1, include_boundaries="right")
        self._fit_geometry(X)
        return self

    def transform(self, X):
        sino = self._check_transform_input(X)
        return fbp_reconstruct(sino, self.grid_spec_, self.cutoff)


class FBPGradient(_SinogramTransformer):
    """Smoothed gradient by filtered backprojection (Method 1).

    ``route="combined"`` uses the single combined filter, ``"preprocess"``
    filters with the Gaussian derivative first and then runs plain FBP.
    """

    def __init__(self, epsilon=3.0, route="combined", cutoff=1.0, size=None, pixel_size=None, threads=None):
        self.epsilon = epsilon
        self.route = route
        self.cutoff = cutoff
        self.size = size
        self.pixel_size = pixel_size
        self.threads = threads

    def fit(self, X, y=None):
        check_scalar(self.epsilon, "epsilon", numbers.Real, min_val=0, include_boundaries="neither")
        check_scalar(self.cutoff, "cutoff", numbers.Real, min_val=0, max_val=1, include_boundaries="right")
        if self.route not in ("combined", "preprocess"):
            raise ValueError(f"route must be 'combined' or 'preprocess', got {self.route!r}")
        self._fit_geometry(X)
        return self

    def transform(self, X):
        sino = self._check_transform_input(X)
        eps = self.epsilon * self.grid_spec_.pixel_size
        if self.route == "combined":
            return method1_gradient_combined(sino, eps, self.grid_spec_, self.threads)
        return method1_gradient_preprocess(sino, eps, self.grid_spec_, self.cutoff, self.threads)


class L1Gradient(_SinogramTransformer):
    """Smoothed gradient by l1-regularized inversion (Method 2).

    ``fit`` estimates the operator norm for the sinogram's geometry;
    ``transform`` runs ISTA per component.  With ``lam_mode="relative"``,
    ``lam`` is scaled by ``||2 R^T y_j||_inf`` of each right-hand side.
    After ``transform``, ``diagnostics_`` holds the two solver results.
    """

    def __init__(
        self,
        epsilon=6.0,
        lam=0.01,
        lam_mode="absolute",
        max_iters=500,
        rel_tol=1e-6,
        step_safety=0.9,
        lipschitz_iters=50,
        seed=0,
        size=None,
        pixel_size=None,
        threads=None,
    ):
        self.epsilon = epsilon
        self.lam = lam
        self.lam_mode = lam_mode
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.step_safety = step_safety
        self.lipschitz_iters = lipschitz_iters
        self.seed = seed
        self.size = size
        self.pixel_size = pixel_size
        self.threads = threads

    def _config(self):
        return IstaConfig(
            lam=self.lam,
            max_iters=self.max_iters,
            rel_tol=self.rel_tol,
            step_safety=self.step_safety,
            lipschitz_iters=self.lipschitz_iters,
            seed=self.seed,
        )

    def fit(self, X, y=None):
        check_scalar(self.epsilon, "epsilon", numbers.Real, min_val=0, include_boundaries="neither")
        check_scalar(self.max_iters, "max_iters", numbers.Integral, min_val=1)
        if self.lam_mode not in ("absolute", "relative"):
            raise ValueError(f"lam_mode must be 'absolute' or 'relative', got {self.lam_mode!r}")
        cfg = self._config()
        sino = self._fit_geometry(X)
        op = radon_operator(self.grid_spec_, sino.angle_set, sino.detector)
        self.lipschitz_ = estimate_lipschitz(
            op.forward, op.adjoint, self.grid_spec_.shape, cfg.lipschitz_iters, cfg.seed
        )
        self.angles_ = sino.angles.copy()
        return self

    def transform(self, X):
        sino = self._check_transform_input(X)
        if sino.n_angles != self.n_angles_ or (sino.angles != self.angles_).any():
            # the cached operator norm belongs to the fitted angle set
            raise GeometryError("transform angles differ from the angles seen in fit")
        cfg = self._config()
        eps = self.epsilon * self.grid_spec_.pixel_size
        gf, diags = method2_gradient(
            sino,
            eps,
            cfg,
            self.grid_spec_,
            lam_relative=self.lam_mode == "relative",
            threads=self.threads,
            lipschitz=self.lipschitz_,
        )
        self.diagnostics_ = diags
        return gf


class CannyEdgeDetector(TransformerMixin, BaseEstimator):
    """Canny edges from a gradient field, thresholds as fractions of the peak.

    ``score(X, y)`` returns the F1 of the detected edges against the
    reference edge map ``y`` within ``match_radius`` pixels.
    """

    def __init__(self, low=0.1, high=0.25, match_radius=2.0):
        self.low = low
        self.high = high
        self.match_radius = match_radius

    def fit(self, X=None, y=None):
        check_scalar(self.low, "low", numbers.Real, min_val=0, max_val=1)
        check_scalar(self.high, "high", numbers.Real, min_val=self.low, max_val=1)
        check_scalar(self.match_radius, "match_radius", numbers.Real, min_val=0)
        self.fitted_ = True
        return self

    def transform(self, X):
        check_is_fitted(self, "fitted_")
        return canny_from_gradient(check_gradient_field(X), self.low, self.high)

    def score(self, X, y):
        if not hasattr(self, "fitted_"):
            self.fit()
        return edge_f1(self.transform(X), y, self.match_radius)[2]
