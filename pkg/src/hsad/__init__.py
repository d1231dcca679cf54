"""Hyperspectral anomaly detection via fuzzy decision rules and a quantum readout.

The pipeline fuzzifies a reflectance cube into three membership degree maps
(morphological, geometrical, statistical), combines them with an Einstein
fuzzy rule engine into a classical detection map, trains a small
quantum-fuzzy network against pseudo labels drawn from that map, and fuses
both detections into the final per-pixel anomaly map.
"""

__version__ = "0.1.0"

from .hsi import Hsi, gaussian_blur, minmax_normalize
from .envi import load_envi, save_envi
from .membership import geometrical_mf, membership_maps, morphological_mf, statistical_mf
from .classical import classical_detect
from .qnet import fuse_detections, train
from .evaluate import roc_auc
from .synth import SceneSpec, gen_scene
from .pipeline import RunConfig, TrainConfig, detect

__all__ = [
    "Hsi",
    "RunConfig",
    "SceneSpec",
    "TrainConfig",
    "classical_detect",
    "detect",
    "fuse_detections",
    "gaussian_blur",
    "gen_scene",
    "geometrical_mf",
    "load_envi",
    "membership_maps",
    "minmax_normalize",
    "morphological_mf",
    "roc_auc",
    "save_envi",
    "statistical_mf",
    "train",
]
