"""The three anomaly membership degree maps computed from a cube.

Each map answers "under one property, which pixels look anomalous":
morphological (small connected structures), geometrical (unmixing residual
fusion), and statistical (Mahalanobis distance). All three are min-max
normalized into [0, 1] before entering any fuzzy operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hsi import Hsi, gaussian_blur, minmax_normalize
from .morphology import area_closing, area_opening
from .unmixing import extract_endmembers, solve_abundances

DEGENERATE_VARIANCE = 1e-12


@dataclass
class PrincipalStack:
    """Standardized principal component maps of a cube.

    ``components`` holds (H, W, P) z-scored scores, ``loadings`` the (C, P)
    orthonormal basis, ``scales`` the per-component score standard deviation
    needed to undo the standardization. Components with (near) zero variance
    are left as zeros and flagged in ``degenerate``.
    """

    components: np.ndarray
    loadings: np.ndarray
    mean_spectrum: np.ndarray
    scales: np.ndarray
    degenerate: list[bool]

    @property
    def count(self) -> int:
        return self.components.shape[2]


@dataclass
class AbundanceStack:
    """Per-pixel material proportions and the endmember spectra behind them."""

    maps: np.ndarray  # (H, W, N), nonnegative
    endmembers: np.ndarray  # (C, N)

    @property
    def count(self) -> int:
        return self.maps.shape[2]


def subspace_project(h: Hsi, n_components: int = 3) -> PrincipalStack:
    """Project onto the top principal directions of the band covariance."""
    if n_components > h.bands:
        raise ValueError(f"{n_components} components exceed {h.bands} bands")
    if h.n_pixels < n_components + 1:
        raise ValueError("not enough pixels for the requested subspace")
    pixels = h.pixels()
    mean = pixels.mean(axis=0)
    centered = pixels - mean
    cov = centered.T @ centered / (h.n_pixels - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    top = np.argsort(eigvals)[::-1][:n_components]
    loadings = eigvecs[:, top]
    scores = centered @ loadings
    scales = scores.std(axis=0)
    degenerate = [bool(s * s < DEGENERATE_VARIANCE) for s in scales]
    standardized = np.zeros_like(scores)
    for k in range(n_components):
        if not degenerate[k]:
            standardized[:, k] = scores[:, k] / scales[k]
    return PrincipalStack(
        components=standardized.reshape(h.height, h.width, n_components),
        loadings=loadings,
        mean_spectrum=mean,
        scales=scales,
        degenerate=degenerate,
    )


def default_area_threshold(n_pixels: int) -> int:
    """0.1% of the pixel count, at least 4 pixels."""
    return max(4, int(math.ceil(1e-3 * n_pixels)))


def morphological_mf(
    h: Hsi, area_threshold: int | None = None, n_components: int = 3
) -> np.ndarray:
    """Accumulated opening/closing residuals over the principal components."""
    if area_threshold is None:
        area_threshold = default_area_threshold(h.n_pixels)
    if area_threshold < 1:
        raise ValueError(f"area threshold must be >= 1, got {area_threshold}")
    stack = subspace_project(h, n_components)
    acc = np.zeros((h.height, h.width))
    for k in range(stack.count):
        comp = minmax_normalize(stack.components[:, :, k])
        opened = area_opening(comp, area_threshold)
        closed = area_closing(comp, area_threshold)
        acc += np.abs(comp - opened) + np.abs(comp - closed)
    return minmax_normalize(acc)


def unmix(
    h: Hsi,
    n_endmembers: int = 4,
    sum_to_one: bool = True,
    normalize: bool = True,
) -> AbundanceStack:
    """Extract endmembers and invert abundances.

    With ``normalize`` each abundance map is min-max rescaled so it can act
    as a degree surrogate; disable it to inspect the raw solver output
    (nonnegative, summing to one per pixel when ``sum_to_one`` is set).
    """
    pixels = h.pixels()
    _, endmembers = extract_endmembers(pixels, n_endmembers)
    abundances = solve_abundances(pixels, endmembers, sum_to_one=sum_to_one)
    maps = abundances.reshape(h.height, h.width, n_endmembers)
    if normalize:
        maps = np.stack(
            [minmax_normalize(maps[:, :, k]) for k in range(n_endmembers)], axis=2
        )
    return AbundanceStack(maps=maps, endmembers=endmembers)


def guidance_map(h: Hsi, sigma: float = 5.0) -> np.ndarray:
    """Band-averaged absolute residual against a Gaussian-smoothed cube."""
    smoothed = gaussian_blur(h, sigma)
    diff = np.abs(h.data.astype(np.float64) - smoothed.data.astype(np.float64))
    return diff.mean(axis=2)


def learn_lpv(stack: AbundanceStack, guide: np.ndarray) -> np.ndarray:
    """Least-squares weights fusing abundance maps toward the guidance map.

    Solves min_a 0.5 * ||guide - sum_i a_i * maps_i||_F^2 in closed form;
    rank-deficient stacks get the minimum-norm solution.
    """
    guide = np.asarray(guide, dtype=np.float64)
    if guide.shape != stack.maps.shape[:2]:
        raise ValueError(
            f"guide shape {guide.shape} does not match maps {stack.maps.shape[:2]}"
        )
    design = stack.maps.reshape(-1, stack.count)
    weights, _, _, _ = np.linalg.lstsq(design, guide.ravel(), rcond=None)
    return weights


def geometrical_mf(h: Hsi, n_endmembers: int = 4, sigma: float = 5.0) -> np.ndarray:
    """Learned abundance fusion gated by the smoothing residual."""
    stack = unmix(h, n_endmembers)
    guide = guidance_map(h, sigma)
    weights = learn_lpv(stack, guide)
    fused = np.maximum(stack.maps @ weights, 0.0)
    return minmax_normalize(fused * guide)


def mahalanobis_scores(pixels: np.ndarray, ridge_scale: float = 1e-6) -> np.ndarray:
    """Per-row Mahalanobis distance against the sample mean and covariance.

    The covariance is regularized with ridge_scale * trace / C on the
    diagonal so rank-deficient data stays solvable.
    """
    data = np.asarray(pixels, dtype=np.float64)
    n, c = data.shape
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (n - 1)
    trace = float(np.trace(cov))
    if trace == 0.0:
        return np.zeros(n)
    cov[np.diag_indices_from(cov)] += ridge_scale * trace / c
    solved = np.linalg.solve(cov, centered.T)
    return np.einsum("ij,ji->i", centered, solved)


def statistical_mf(h: Hsi) -> np.ndarray:
    """Normalized Mahalanobis distance of every pixel to the global background."""
    if h.n_pixels < h.bands + 1:
        raise ValueError("need at least bands + 1 pixels for a covariance estimate")
    raw = mahalanobis_scores(h.pixels())
    return minmax_normalize(raw.reshape(h.height, h.width))


def membership_maps(
    h: Hsi,
    area_threshold: int | None = None,
    n_endmembers: int = 4,
    sigma: float = 5.0,
    n_components: int = 3,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Convenience: the (morphological, geometrical, statistical) triple."""
    return (
        morphological_mf(h, area_threshold, n_components),
        geometrical_mf(h, n_endmembers, sigma),
        statistical_mf(h),
    )
