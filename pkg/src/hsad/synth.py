"""Deterministic synthetic scenes with implanted spectral anomalies.

Backgrounds are smooth mixtures of a few smooth random spectra; anomalies
are compact blobs carrying a spectrum at least 15 degrees of spectral angle
away from every background endmember. Scenes reproduce bit-identically from
their seed and optionally carry additive Gaussian noise at a requested SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hsi import Hsi, gaussian_blur

MIN_ANGLE_DEG = 15.0
MAX_SPECTRUM_TRIES = 200
MAX_PLACEMENT_TRIES = 500

# Blob stencils inside a 3x3 window, one per size 1..9.
_BLOBS = {
    1: ((0, 0),),
    2: ((0, 0), (0, 1)),
    3: ((0, 0), (0, 1), (1, 0)),
    4: ((0, 0), (0, 1), (1, 0), (1, 1)),
    5: ((0, 1), (1, 0), (1, 1), (1, 2), (2, 1)),  # cross
    6: ((0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)),
    7: ((0, 1), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)),
    8: ((0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1), (2, 2)),
    9: tuple((r, c) for r in range(3) for c in range(3)),
}


class SceneGenerationError(RuntimeError):
    """Could not satisfy the scene constraints within the retry budget."""


@dataclass
class SceneSpec:
    height: int = 64
    width: int = 64
    bands: int = 30
    n_endmembers: int = 4
    n_anomalies: int = 5
    anomaly_size: int = 3
    # per-blob mixing fraction of the anomaly spectrum into the background
    # (subpixel implants; 1.0 means pure anomaly pixels)
    anomaly_strength: tuple[float, float] = (0.55, 0.85)
    snr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        if min(self.height, self.width) < 8:
            raise ValueError("scene must be at least 8x8")
        if self.bands < 4:
            raise ValueError("scene needs at least 4 bands")
        if not 1 <= self.anomaly_size <= 9:
            raise ValueError(f"anomaly size must be 1..9, got {self.anomaly_size}")
        if self.n_anomalies < 0:
            raise ValueError("anomaly count must be nonnegative")
        lo, hi = self.anomaly_strength
        if not (0.0 < lo <= hi <= 1.0):
            raise ValueError(f"anomaly strength must satisfy 0 < lo <= hi <= 1, got {self.anomaly_strength}")


def _smooth_spectrum(rng: np.random.Generator, bands: int) -> np.ndarray:
    """Cubic-smoothed random walk rescaled to [0.1, 0.9]."""
    walk = np.cumsum(rng.standard_normal(bands + 12))
    kernel = np.ones(5) / 5.0
    for _ in range(3):
        walk = np.convolve(walk, kernel, mode="same")
    walk = walk[6 : 6 + bands]
    lo, hi = walk.min(), walk.max()
    if hi == lo:
        return np.full(bands, 0.5)
    return 0.1 + 0.8 * (walk - lo) / (hi - lo)


def _spectral_angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    cosine = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))


def _smooth_field(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    noise = rng.standard_normal((height, width, 1))
    sigma = max(height, width) / 8.0
    return gaussian_blur(Hsi(noise), sigma).data[:, :, 0].astype(np.float64)


def background_abundances(rng, height, width, n_endmembers) -> np.ndarray:
    """Smooth nonnegative abundance fields summing to one per pixel."""
    fields = np.stack(
        [_smooth_field(rng, height, width) for _ in range(n_endmembers)], axis=2
    )
    logits = fields / 0.05  # sharpen so single materials dominate regions
    logits -= logits.max(axis=2, keepdims=True)
    weights = np.exp(logits)
    return weights / weights.sum(axis=2, keepdims=True)


def gen_scene(spec: SceneSpec) -> tuple[Hsi, np.ndarray]:
    """Generate (cube, reference mask) for a scene specification."""
    rng = np.random.default_rng(spec.seed)
    endmembers = np.stack(
        [_smooth_spectrum(rng, spec.bands) for _ in range(spec.n_endmembers)], axis=1
    )
    abundances = background_abundances(rng, spec.height, spec.width, spec.n_endmembers)
    cube = abundances @ endmembers.T

    anomaly_spectrum = None
    for _ in range(MAX_SPECTRUM_TRIES):
        candidate = _smooth_spectrum(rng, spec.bands)
        angles = [
            _spectral_angle_deg(candidate, endmembers[:, k])
            for k in range(spec.n_endmembers)
        ]
        if min(angles) >= MIN_ANGLE_DEG:
            anomaly_spectrum = candidate
            break
    if anomaly_spectrum is None and spec.n_anomalies > 0:
        raise SceneGenerationError(
            f"no anomaly spectrum {MIN_ANGLE_DEG} degrees from all endmembers "
            f"after {MAX_SPECTRUM_TRIES} tries"
        )

    reference = np.zeros((spec.height, spec.width), dtype=np.uint8)
    stencil = _BLOBS[spec.anomaly_size]
    placed = 0
    tries = 0
    occupied = np.zeros_like(reference, dtype=bool)
    while placed < spec.n_anomalies:
        if tries >= MAX_PLACEMENT_TRIES:
            raise SceneGenerationError(
                f"placed only {placed}/{spec.n_anomalies} anomalies "
                f"after {MAX_PLACEMENT_TRIES} tries"
            )
        tries += 1
        r0 = int(rng.integers(1, spec.height - 3))
        c0 = int(rng.integers(1, spec.width - 3))
        # keep one clear pixel around each blob so components stay separate
        region = occupied[max(r0 - 1, 0) : r0 + 4, max(c0 - 1, 0) : c0 + 4]
        if region.any():
            continue
        strength = rng.uniform(*spec.anomaly_strength)
        for dr, dc in stencil:
            reference[r0 + dr, c0 + dc] = 1
            occupied[r0 + dr, c0 + dc] = True
            cube[r0 + dr, c0 + dc, :] = (
                strength * anomaly_spectrum + (1.0 - strength) * cube[r0 + dr, c0 + dc, :]
            )
        placed += 1

    scene = Hsi(cube)
    if spec.snr_db is not None:
        scene = add_noise(scene, spec.snr_db, seed=spec.seed + 1)
    return scene, reference


def add_noise(h: Hsi, snr_db: float, seed: int = 0) -> Hsi:
    """Additive i.i.d. Gaussian noise at the requested signal-to-noise ratio.

    Signal power is the mean squared value over the cube; the noise variance
    is power / 10^(snr/10).
    """
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    data = h.data.astype(np.float64)
    power = float((data * data).mean())
    sigma = np.sqrt(power / (10.0 ** (snr_db / 10.0)))
    rng = np.random.default_rng(seed)
    return Hsi(data + sigma * rng.standard_normal(data.shape), wavelengths=h.wavelengths)


def measure_snr_db(clean: Hsi, noisy: Hsi) -> float:
    """Empirical SNR of ``noisy`` against the clean cube, in dB."""
    signal = clean.data.astype(np.float64)
    residual = noisy.data.astype(np.float64) - signal
    return float(10.0 * np.log10((signal**2).mean() / (residual**2).mean()))
