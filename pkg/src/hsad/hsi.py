"""Hyperspectral cube container and elementary signal conditioning.

Conventions shared across the package: cubes are (rows, cols, bands) float32
arrays, score maps are unbounded nonnegative (H, W) float64 arrays, degree
maps live in [0, 1], and masks are {0, 1} uint8 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d


@dataclass
class Hsi:
    """A rows x cols x bands reflectance cube.

    Data is held as float32, which is also the on-disk word size, so ENVI
    round trips are bit exact. ``wavelengths`` (nanometers, one per band) is
    optional metadata.
    """

    data: np.ndarray
    wavelengths: list[float] | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float32)
        if self.data.ndim != 3:
            raise ValueError(f"cube must be (rows, cols, bands), got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("cube contains non-finite values")
        if self.wavelengths is not None:
            self.wavelengths = [float(w) for w in self.wavelengths]
            if len(self.wavelengths) != self.bands:
                raise ValueError(
                    f"{len(self.wavelengths)} wavelengths for {self.bands} bands"
                )

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def bands(self) -> int:
        return self.data.shape[2]

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    def pixels(self) -> np.ndarray:
        """Flattened (n_pixels, bands) float64 view of the cube."""
        return self.data.reshape(-1, self.bands).astype(np.float64)


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Rescale a finite map to [0, 1]; a constant map goes to all zeros."""
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot normalize non-finite values")
    lo = v.min()
    hi = v.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def gaussian_blur(h: Hsi, sigma: float) -> Hsi:
    """Per-band separable Gaussian smoothing with replicate edge handling."""
    kernel = gaussian_kernel(sigma)
    data = h.data.astype(np.float64)
    out = np.empty_like(data)
    for b in range(h.bands):
        tmp = correlate1d(data[:, :, b], kernel, axis=0, mode="nearest")
        out[:, :, b] = correlate1d(tmp, kernel, axis=1, mode="nearest")
    return Hsi(out, wavelengths=h.wavelengths)
