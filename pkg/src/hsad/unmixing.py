"""Endmember extraction and abundance inversion for linear mixing models."""

from __future__ import annotations

import numpy as np
from scipy.optimize import nnls

# Weight of the sum-to-one row appended to the endmember system, relative
# to the spectral magnitude. Large enough that per-pixel abundance sums
# land within 1e-3 of one whenever the pixel is representable.
SUM_TO_ONE_WEIGHT = 1e3


def extract_endmembers(pixels: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Pick ``n`` pixel spectra by successive projection.

    Greedily selects the pixel with the largest residual norm, then projects
    the data onto the orthogonal complement of the selection. Returns the
    chosen pixel indices and the (bands, n) endmember matrix.
    """
    data = np.asarray(pixels, dtype=np.float64)
    n_pixels, bands = data.shape
    if n < 2:
        raise ValueError(f"need at least 2 endmembers, got {n}")
    if n > bands:
        raise ValueError(f"{n} endmembers exceed {bands} bands")
    if n > n_pixels:
        raise ValueError(f"{n} endmembers exceed {n_pixels} pixels")
    residual = data.copy()
    indices = []
    for _ in range(n):
        norms = np.einsum("ij,ij->i", residual, residual)
        j = int(np.argmax(norms))
        indices.append(j)
        u = residual[j]
        nrm2 = norms[j]
        if nrm2 > 0.0:
            residual = residual - np.outer(residual @ u, u) / nrm2
    return np.asarray(indices), data[indices].T.copy()


def solve_abundances(
    pixels: np.ndarray, endmembers: np.ndarray, sum_to_one: bool = True
) -> np.ndarray:
    """Nonnegative least-squares abundances, one solve per pixel.

    With ``sum_to_one`` the system is augmented by a heavily weighted
    all-ones row so abundances sum to one up to the penalty slack.
    """
    data = np.asarray(pixels, dtype=np.float64)
    e = np.asarray(endmembers, dtype=np.float64)
    bands, n = e.shape
    if data.shape[1] != bands:
        raise ValueError(f"pixels have {data.shape[1]} bands, endmembers {bands}")
    if sum_to_one:
        w = SUM_TO_ONE_WEIGHT * max(1.0, float(np.abs(e).max()))
        system = np.vstack([e, w * np.ones((1, n))])
    else:
        system = e
    out = np.empty((data.shape[0], n))
    for i in range(data.shape[0]):
        rhs = np.append(data[i], w) if sum_to_one else data[i]
        out[i], _ = nnls(system, rhs)
    return out
