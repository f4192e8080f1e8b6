"""Canny edge detection on a precomputed gradient field, plus edge-map scoring.

No blur happens here; the smoothing scale is already in the gradient.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial import cKDTree

from .core import EdgeMap, GeometryError, GradientField, ImageGrid, gradient_magnitude

__all__ = [
    "nonmax_suppress",
    "hysteresis",
    "canny_from_gradient",
    "edge_f1",
    "distance_band",
]

# (d_row, d_col) neighbor offsets for the four quantized directions
_NEIGHBORS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))


def _shift(arr, dr, dc):
    """``out[r, c] = arr[r + dr, c + dc]``, zero outside."""
    out = np.zeros_like(arr)
    n_r, n_c = arr.shape
    rs = slice(max(dr, 0), n_r + min(dr, 0))
    rd = slice(max(-dr, 0), n_r + min(-dr, 0))
    cs = slice(max(dc, 0), n_c + min(dc, 0))
    cd = slice(max(-dc, 0), n_c + min(-dc, 0))
    out[rd, cd] = arr[rs, cs]
    return out


def nonmax_suppress(gf: GradientField) -> ImageGrid:
    """Zero every pixel whose magnitude is strictly below a neighbor along the gradient.

    The gradient direction is quantized to 8 sectors (4 neighbor axes).
    Ties with a neighbor keep the pixel; out-of-grid neighbors count as 0.
    """
    mag = gradient_magnitude(gf).data
    # rows run along -x2, so the array-space direction is (-gy, gx)
    angle = np.arctan2(gf.gy.data, gf.gx.data)
    sector = np.mod(np.rint(angle / (np.pi / 4)).astype(int), 4)
    keep = np.ones(mag.shape, dtype=bool)
    for k, (dr, dc) in enumerate(_NEIGHBORS):
        sel = sector == k
        if not sel.any():
            continue
        ahead = _shift(mag, dr, dc)
        behind = _shift(mag, -dr, -dc)
        keep[sel] = (mag[sel] >= ahead[sel]) & (mag[sel] >= behind[sel])
    return ImageGrid(np.where(keep, mag, 0.0), gf.gx.pixel_size)


def hysteresis(nms: ImageGrid, low: float, high: float) -> EdgeMap:
    """Keep pixels >= ``high`` and pixels >= ``low`` 8-connected to them.

    Only nonzero responses are candidates, so a zero image has no edges.
    """
    if low < 0 or low > high:
        raise ValueError(f"need 0 <= low <= high, got low={low}, high={high}")
    mag = nms.data
    candidate = (mag >= low) & (mag > 0)
    strong = (mag >= high) & candidate
    labels, n_labels = ndimage.label(candidate, structure=np.ones((3, 3), dtype=int))
    if n_labels == 0:
        return EdgeMap(np.zeros(mag.shape, dtype=bool))
    seeded = np.zeros(n_labels + 1, dtype=bool)
    seeded[np.unique(labels[strong])] = True
    seeded[0] = False
    return EdgeMap(seeded[labels])


def canny_from_gradient(gf: GradientField, low_frac: float = 0.1, high_frac: float = 0.25) -> EdgeMap:
    """Non-maximum suppression and hysteresis at fractions of the peak NMS magnitude."""
    if not 0 <= low_frac <= high_frac <= 1:
        raise ValueError(f"need 0 <= low_frac <= high_frac <= 1, got {low_frac}, {high_frac}")
    nms = nonmax_suppress(gf)
    peak = float(nms.data.max())
    if peak <= 0:
        return EdgeMap(np.zeros(nms.data.shape, dtype=bool))
    return hysteresis(nms, low_frac * peak, high_frac * peak)


def _as_mask(edges) -> np.ndarray:
    if isinstance(edges, EdgeMap):
        return edges.data
    return np.asarray(edges, dtype=bool)


def edge_f1(pred, truth, match_radius: float = 2.0) -> tuple[float, float, float]:
    """Precision, recall and F1 under one-to-one matching within ``match_radius`` pixels.

    The matching has maximum cardinality over all pairs closer than the
    radius.  Conventions: an empty prediction has precision 1; an empty
    truth has recall 1; F1 is 0 when precision + recall is 0.
    """
    p_mask, t_mask = _as_mask(pred), _as_mask(truth)
    if p_mask.shape != t_mask.shape:
        raise GeometryError(f"edge maps differ in shape: {p_mask.shape} vs {t_mask.shape}")
    if match_radius < 0:
        raise ValueError(f"match_radius must be >= 0, got {match_radius}")
    p_pts = np.argwhere(p_mask)
    t_pts = np.argwhere(t_mask)
    n_p, n_t = len(p_pts), len(t_pts)

    matched = 0
    if n_p and n_t:
        pairs = cKDTree(p_pts).query_ball_tree(cKDTree(t_pts), r=match_radius + 1e-9)
        rows = np.repeat(np.arange(n_p), [len(p) for p in pairs])
        cols = np.fromiter((c for p in pairs for c in p), dtype=np.int64, count=rows.size)
        if rows.size:
            graph = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n_p, n_t)).tocsr()
            matching = maximum_bipartite_matching(graph, perm_type="column")
            matched = int(np.count_nonzero(matching >= 0))

    precision = matched / n_p if n_p else 1.0
    recall = matched / n_t if n_t else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def distance_band(truth, radius: float) -> np.ndarray:
    """Pixels within ``radius`` (Euclidean) of any true edge pixel."""
    t_mask = _as_mask(truth)
    if not t_mask.any():
        return np.zeros(t_mask.shape, dtype=bool)
    return ndimage.distance_transform_edt(~t_mask) <= radius
