"""Seeded synthetic experiment suites shared by scripts and acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classical import classical_detect_from_degrees
from .evaluate import roc_auc
from .hsi import Hsi, minmax_normalize
from .membership import membership_maps
from .qnet import TrainConfig, fuse_detections, train
from .synth import SceneSpec, gen_scene


@dataclass
class SceneScores:
    seed: int
    auc_classical: float
    auc_classical_minmax: float
    auc_quantum: float
    auc_fused: float


# the acceptance-scale scene family: subpixel implants under moderate noise
SUITE_STRENGTH = (0.35, 0.6)
SUITE_SNR_DB = 20.0


def run_scene(
    seed: int,
    height: int = 64,
    width: int = 64,
    bands: int = 30,
    n_anomalies: int = 5,
    anomaly_strength: tuple[float, float] = SUITE_STRENGTH,
    snr_db: float | None = SUITE_SNR_DB,
    use_hesitancy: bool = True,
    with_minmax: bool = True,
    epochs: int = 30,
) -> SceneScores:
    """Generate one scene and score every detector variant on it."""
    spec = SceneSpec(
        height=height,
        width=width,
        bands=bands,
        n_anomalies=n_anomalies,
        anomaly_strength=anomaly_strength,
        snr_db=snr_db,
        seed=seed,
    )
    scene, reference = gen_scene(spec)
    cube = Hsi(minmax_normalize(scene.data.astype(np.float64)))
    f_m, f_g, f_s = membership_maps(cube)

    d_classical, _ = classical_detect_from_degrees(f_m, f_g, f_s, "einstein")
    auc_classical = roc_auc(d_classical, reference).auc

    auc_minmax = float("nan")
    if with_minmax:
        d_minmax, _ = classical_detect_from_degrees(f_m, f_g, f_s, "minmax")
        auc_minmax = roc_auc(d_minmax, reference).auc

    cfg = TrainConfig(epochs=epochs, seed=seed, use_hesitancy=use_hesitancy)
    result = train(cube, f_m, f_g, f_s, d_classical, cfg)
    auc_quantum = roc_auc(result.detection, reference).auc
    auc_fused = roc_auc(fuse_detections(d_classical, result.detection), reference).auc

    return SceneScores(seed, auc_classical, auc_minmax, auc_quantum, auc_fused)


def run_suite(seeds, **kwargs) -> list[SceneScores]:
    return [run_scene(seed, **kwargs) for seed in seeds]


def summarize(results) -> dict:
    return {
        "auc_classical": float(np.mean([r.auc_classical for r in results])),
        "auc_classical_minmax": float(np.mean([r.auc_classical_minmax for r in results])),
        "auc_quantum": float(np.mean([r.auc_quantum for r in results])),
        "auc_fused": float(np.mean([r.auc_fused for r in results])),
    }
