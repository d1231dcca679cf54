"""End-to-end detection: membership maps, classical engine, quantum network,
and the fused map, with per-stage wall-clock bookkeeping."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .classical import classical_detect_from_degrees
from .config import RunConfig
from .hsi import Hsi, minmax_normalize
from .membership import membership_maps
from .qnet import TrainConfig, fuse_detections, train
from .synth import add_noise


@dataclass
class DetectionResult:
    classical: np.ndarray
    quantum: np.ndarray | None
    fused: np.ndarray | None
    alpha: float
    band_energy: np.ndarray | None
    losses: list[float] | None
    stage_seconds: dict = field(default_factory=dict)
    memberships: tuple | None = None


def detect(h: Hsi, cfg: RunConfig | None = None) -> DetectionResult:
    """Run the configured pipeline on a cube.

    The cube is min-max normalized up front so fuzzy degrees and the network
    encoding see a common scale regardless of sensor units.
    """
    cfg = (cfg or RunConfig()).validate()
    timings = {}
    start = time.perf_counter()

    if cfg.snr_db is not None:
        h = add_noise(h, cfg.snr_db, seed=cfg.seed + 1)
    cube = Hsi(minmax_normalize(h.data.astype(np.float64)), wavelengths=h.wavelengths)

    t0 = time.perf_counter()
    f_m, f_g, f_s = membership_maps(
        cube, cfg.area_threshold, cfg.n_endmembers, cfg.blur_sigma, cfg.n_components
    )
    timings["fuzzify"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    d_classical, alpha = classical_detect_from_degrees(
        f_m, f_g, f_s, cfg.ops, cfg.e1, cfg.e2, cfg.gf_radius, cfg.gf_eps,
        gdm_init_alpha=cfg.gdm_init_alpha, gdm_lr=cfg.gdm_lr, gdm_max_iter=cfg.gdm_max_iter,
    )
    timings["classical"] = time.perf_counter() - t0

    d_quantum = None
    band_energy = None
    losses = None
    if cfg.mode in ("quantum", "fused"):
        t0 = time.perf_counter()
        train_cfg = TrainConfig(
            epochs=cfg.train.epochs,
            lr=cfg.train.lr,
            lambda_tv=cfg.train.lambda_tv,
            e3=cfg.train.e3,
            e4=cfg.train.e4,
            seed=cfg.train.seed if cfg.train.seed else cfg.seed,
            use_hesitancy=cfg.train.use_hesitancy,
        )
        result = train(cube, f_m, f_g, f_s, d_classical, train_cfg)
        d_quantum = result.detection
        band_energy = result.band_energy
        losses = result.losses
        timings["quantum"] = time.perf_counter() - t0

    d_fused = None
    if cfg.mode == "fused":
        d_fused = fuse_detections(d_classical, d_quantum)

    timings["total"] = time.perf_counter() - start
    return DetectionResult(
        classical=d_classical,
        quantum=d_quantum,
        fused=d_fused,
        alpha=alpha,
        band_energy=band_energy,
        losses=losses,
        stage_seconds=timings,
        memberships=(f_m, f_g, f_s),
    )
