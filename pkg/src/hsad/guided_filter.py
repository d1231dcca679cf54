"""Edge-preserving guided filter on degree maps."""

from __future__ import annotations

import numpy as np


def box_mean(values: np.ndarray, radius: int) -> np.ndarray:
    """Mean over a clamped (2r+1)^2 window, computed with an integral image.

    Windows are truncated at the borders and normalized by the number of
    in-image pixels, so the operator is exact for any map at least 1x1.
    """
    a = np.asarray(values, dtype=np.float64)
    h, w = a.shape
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = a.cumsum(axis=0).cumsum(axis=1)
    r0 = np.clip(np.arange(h) - radius, 0, h)
    r1 = np.clip(np.arange(h) + radius + 1, 0, h)
    c0 = np.clip(np.arange(w) - radius, 0, w)
    c1 = np.clip(np.arange(w) + radius + 1, 0, w)
    sums = (
        integral[np.ix_(r1, c1)]
        - integral[np.ix_(r0, c1)]
        - integral[np.ix_(r1, c0)]
        + integral[np.ix_(r0, c0)]
    )
    counts = np.outer(r1 - r0, c1 - c0)
    return sums / counts


def guided_filter(
    values: np.ndarray,
    guide: np.ndarray,
    radius: int = 4,
    eps: float = 1e-3,
) -> np.ndarray:
    """Local linear filtering of ``values`` steered by ``guide``.

    The output is clamped to [0, 1] since it carries fuzzy degrees.
    """
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    p = np.asarray(values, dtype=np.float64)
    g = np.asarray(guide, dtype=np.float64)
    if p.shape != g.shape:
        raise ValueError(f"input shape {p.shape} != guide shape {g.shape}")
    mean_g = box_mean(g, radius)
    mean_p = box_mean(p, radius)
    cov_gp = box_mean(g * p, radius) - mean_g * mean_p
    var_g = box_mean(g * g, radius) - mean_g * mean_g
    a = cov_gp / (var_g + eps)
    b = mean_p - a * mean_g
    out = box_mean(a, radius) * g + box_mean(b, radius)
    return np.clip(out, 0.0, 1.0)
