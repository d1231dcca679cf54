"""Trainable fuzzy feature aggregation with a quantum-circuit readout.

The network re-fuzzifies the three membership maps with trainable Gaussian
membership functions, adds per-pixel hesitancy logits so (anomaly,
background, hesitancy) softmax to one, matches five deep rule tracks,
shuffles the rule channels into a 4-feature stack, adds four automatically
selected spectral bands, and defuzzifies each pixel through the shared
4-qubit circuit. Training is self-supervised: pseudo labels come from the
most confident pixels of the classical detection map.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import quantum
from .classical import kmeans_binarize
from .hsi import Hsi

MIN_GAUSS_WIDTH = 0.05
LEAKY_SLOPE = 0.2
DEEP_FEATURES = 4

PARAMS_MAGIC = b"HSADQNET"
PARAMS_VERSION = 1


class DegenerateSupervisionError(RuntimeError):
    """The binarized classical map has only one class; no pseudo labels."""


@dataclass
class TrainConfig:
    epochs: int = 30
    lr: float = 3.5e-3
    lambda_tv: float = 5e-5
    e3: float = 0.10
    e4: float = 0.10
    seed: int = 0
    use_hesitancy: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.lr <= 0 or self.lambda_tv < 0:
            raise ValueError("lr must be positive and lambda_tv nonnegative")
        if not (0 < self.e3 <= 1 and 0 < self.e4 <= 1):
            raise ValueError("pseudo-label fractions must lie in (0, 1]")


@dataclass
class ConvMf:
    """Shared 1 -> 4 -> 1 channel map with LeakyReLU inside and sigmoid out."""

    w1: ad.Node
    b1: ad.Node
    w2: ad.Node
    b2: ad.Node


@dataclass
class Projector:
    """1x1 channel projection followed by LeakyReLU."""

    w: ad.Node
    b: ad.Node


@dataclass
class NetworkParams:
    """Every trainable quantity of the quantum decision network."""

    gauss_anomaly: dict  # 'M'/'G'/'S' -> (center, width) Nodes
    gauss_background: dict
    tokens: dict | None  # 'M'/'G'/'S' -> (H, W) Node, or None when ablated
    conv_high: ConvMf
    conv_low: ConvMf
    proj_anomaly: Projector
    proj_background: Projector
    proj_hesitancy: Projector | None
    proj_final: Projector
    bsm_scale: ad.Node
    bsm_bias: ad.Node
    bsm_mix: Projector
    layer_angles: ad.Node
    readout_scale: ad.Node
    readout_offset: ad.Node
    use_hesitancy: bool = True

    def parameters(self) -> list[ad.Node]:
        out = []
        for key in ("M", "G", "S"):
            out.extend(self.gauss_anomaly[key])
            out.extend(self.gauss_background[key])
        if self.tokens is not None:
            out.extend(self.tokens[k] for k in ("M", "G", "S"))
        for mf in (self.conv_high, self.conv_low):
            out.extend((mf.w1, mf.b1, mf.w2, mf.b2))
        projectors = [self.proj_anomaly, self.proj_background, self.proj_final, self.bsm_mix]
        if self.proj_hesitancy is not None:
            projectors.insert(2, self.proj_hesitancy)
        for proj in projectors:
            out.extend((proj.w, proj.b))
        out.extend((self.bsm_scale, self.bsm_bias))
        out.extend((self.layer_angles, self.readout_scale, self.readout_offset))
        return out

    def n_parameters(self, include_tokens: bool = False) -> int:
        count = 0
        for node in self.parameters():
            if not include_tokens and self.tokens is not None:
                if any(node is t for t in self.tokens.values()):
                    continue
            count += node.values.size
        return count

    def gauss_widths(self) -> list[ad.Node]:
        return [pair[1] for group in (self.gauss_anomaly, self.gauss_background) for pair in group.values()]


def _kaiming_uniform(rng, out_ch: int, in_ch: int):
    """PyTorch-style conv default: U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    bound = 1.0 / np.sqrt(in_ch)
    w = rng.uniform(-bound, bound, size=(out_ch, in_ch))
    b = rng.uniform(-bound, bound, size=(out_ch,))
    return ad.parameter(w), ad.parameter(b)


def _init_conv_mf(rng) -> ConvMf:
    """Kaiming-scale draw with nonnegative weights.

    The convolutional membership functions measure "this degree is high", so
    they start monotone non-decreasing in their input; a sign-symmetric draw
    would leave half of them initially inverted, which the short training
    budget cannot reliably undo.
    """
    w1, b1 = _kaiming_uniform(rng, 4, 1)
    w2, b2 = _kaiming_uniform(rng, 1, 4)
    np.abs(w1.values, out=w1.values)
    np.abs(w2.values, out=w2.values)
    return ConvMf(w1, b1, w2, b2)


def init_params(
    height: int, width: int, bands: int, rng: np.random.Generator, use_hesitancy: bool = True
) -> NetworkParams:
    """Draw fresh parameters: Gaussian MFs and circuit angles from normals,
    convolutions Kaiming-uniform, hesitancy tokens all zero."""

    def gauss_pair():
        m = ad.parameter(np.asarray(rng.normal(0.5, 0.1)))
        s = ad.parameter(np.asarray(max(rng.normal(0.3, 0.05), MIN_GAUSS_WIDTH)))
        return m, s

    gauss_anomaly = {k: gauss_pair() for k in ("M", "G", "S")}
    gauss_background = {k: gauss_pair() for k in ("M", "G", "S")}
    tokens = None
    if use_hesitancy:
        tokens = {k: ad.parameter(np.zeros((height, width))) for k in ("M", "G", "S")}
    conv_high = _init_conv_mf(rng)
    conv_low = _init_conv_mf(rng)
    proj_anomaly = Projector(*_kaiming_uniform(rng, 1, 3))
    proj_background = Projector(*_kaiming_uniform(rng, 1, 3))
    proj_hesitancy = Projector(*_kaiming_uniform(rng, 1, 3)) if use_hesitancy else None
    final_in = 5 if use_hesitancy else 4
    proj_final = Projector(*_kaiming_uniform(rng, DEEP_FEATURES, final_in))
    bsm_scale = ad.parameter(rng.uniform(-1.0, 1.0, size=bands))
    bsm_bias = ad.parameter(np.zeros(bands))
    bsm_mix = Projector(*_kaiming_uniform(rng, DEEP_FEATURES, bands))
    layer_angles = ad.parameter(rng.normal(0.0, 0.1, size=quantum.N_LAYER_ANGLES))
    return NetworkParams(
        gauss_anomaly=gauss_anomaly,
        gauss_background=gauss_background,
        tokens=tokens,
        conv_high=conv_high,
        conv_low=conv_low,
        proj_anomaly=proj_anomaly,
        proj_background=proj_background,
        proj_hesitancy=proj_hesitancy,
        proj_final=proj_final,
        bsm_scale=bsm_scale,
        bsm_bias=bsm_bias,
        bsm_mix=bsm_mix,
        layer_angles=layer_angles,
        readout_scale=ad.parameter(np.asarray(1.0)),
        readout_offset=ad.parameter(np.asarray(0.0)),
        use_hesitancy=use_hesitancy,
    )


# ---------------------------------------------------------------------------
# forward pieces


def deep_fuzzify(
    degree_map: np.ndarray,
    token: ad.Node | None,
    anomaly_mf: tuple[ad.Node, ad.Node],
    background_mf: tuple[ad.Node, ad.Node],
) -> ad.Node:
    """Stack (anomaly, background[, hesitancy]) logits and softmax per pixel."""
    x = ad.constant(degree_map)
    x_c = ad.affine(x, -1.0, 1.0)
    channels = [
        ad.gaussian_mf(x, *anomaly_mf),
        ad.gaussian_mf(x_c, *background_mf),
    ]
    if token is not None:
        if token.values.shape != x.values.shape:
            raise ValueError("hesitancy token shape does not match the map")
        channels.append(token)
    return ad.softmax_channels(ad.concat_channels(channels))


def deep_match_soft(t_m: ad.Node, t_g: ad.Node, t_s: ad.Node):
    """Channel-wise algebraic product for the three pairwise rule tracks."""
    return (
        ad.hadamard(t_m, t_s),
        ad.hadamard(t_m, t_g),
        ad.hadamard(t_g, t_s),
    )


def conv_mf(x: ad.Node, mf: ConvMf) -> ad.Node:
    """Apply the shared convolutional membership function to an (H, W) map."""
    stack = ad.concat_channels([x])
    hidden = ad.leaky_relu(ad.channel_linear(stack, mf.w1, mf.b1), LEAKY_SLOPE)
    squashed = ad.sigmoid(ad.channel_linear(hidden, mf.w2, mf.b2))
    return ad.take_channel(squashed, 0)


def deep_match_crisp(
    f_m: np.ndarray,
    f_g: np.ndarray,
    f_s: np.ndarray,
    conv_high: ConvMf,
    conv_low: ConvMf,
):
    """Soft-rounded products of the conv-MF responses: the "all properties
    high" and "all properties low" tracks."""
    high = [conv_mf(ad.constant(m), conv_high) for m in (f_m, f_g, f_s)]
    low = [conv_mf(ad.constant(1.0 - m), conv_low) for m in (f_m, f_g, f_s)]
    t4 = ad.soft_round(ad.hadamard(ad.hadamard(high[0], high[1]), high[2]))
    t5 = ad.soft_round(ad.hadamard(ad.hadamard(low[0], low[1]), low[2]))
    return t4, t5


def _project(proj: Projector, stack: ad.Node) -> ad.Node:
    return ad.leaky_relu(ad.channel_linear(stack, proj.w, proj.b), LEAKY_SLOPE)


def aggregate_features(
    t1: ad.Node,
    t2: ad.Node,
    t3: ad.Node,
    t4: ad.Node,
    t5: ad.Node,
    params: NetworkParams,
) -> ad.Node:
    """Channel-shuffle the rule tracks and project to the deep feature stack."""
    anomaly = ad.concat_channels([ad.take_channel(t, 0) for t in (t1, t2, t3)])
    background = ad.affine(
        ad.concat_channels([ad.take_channel(t, 1) for t in (t1, t2, t3)]), -1.0, 1.0
    )
    pieces = [
        ad.take_channel(_project(params.proj_anomaly, anomaly), 0),
        ad.take_channel(_project(params.proj_background, background), 0),
    ]
    if params.use_hesitancy:
        hesitancy = ad.concat_channels([ad.take_channel(t, 2) for t in (t1, t2, t3)])
        pieces.append(ad.take_channel(_project(params.proj_hesitancy, hesitancy), 0))
    pieces.extend([t4, t5])
    return _project(params.proj_final, ad.concat_channels(pieces))


def band_select(cube: np.ndarray, params: NetworkParams) -> ad.Node:
    """Per-band gate (scale, bias, ReLU) then a 1x1 mix down to 4 channels.

    Bands whose gate turns negative are zeroed by the ReLU, which is the
    automatic band-selection mechanism.
    """
    x = ad.constant(cube)
    if x.values.ndim != 3 or x.values.shape[2] != params.bsm_scale.values.shape[0]:
        raise ValueError(
            f"cube shape {x.values.shape} does not match {params.bsm_scale.values.shape[0]} band gates"
        )
    gated = ad.relu(ad.depthwise_scale(x, params.bsm_scale, params.bsm_bias))
    return ad.channel_linear(gated, params.bsm_mix.w, params.bsm_mix.b)


def band_energy_report(cube: np.ndarray, params: NetworkParams) -> np.ndarray:
    """Mean |activation| per band after the gate; suppressed bands report 0."""
    gated = np.maximum(
        np.asarray(cube, dtype=np.float64) * params.bsm_scale.values + params.bsm_bias.values,
        0.0,
    )
    return np.abs(gated).mean(axis=(0, 1))


def quantum_readout(enc_angles: ad.Node, layer_angles: ad.Node) -> ad.Node:
    """Autodiff primitive around the circuit probability.

    Forward evaluates the batched statevector simulation; the backward
    closures use parameter-shift derivatives, computed lazily and cached so
    inference-only passes never pay for them.
    """
    cache = {}

    def shifted():
        if "grads" not in cache:
            _, d_enc, d_layer = quantum.shift_gradients(
                enc_angles.values, layer_angles.values
            )
            cache["grads"] = (d_enc, d_layer)
        return cache["grads"]

    p = quantum.circuit_probability(enc_angles.values, layer_angles.values)

    def grad_enc(g):
        d_enc, _ = shifted()
        return g[..., None] * d_enc

    def grad_layer(g):
        _, d_layer = shifted()
        return (g[..., None] * d_layer).reshape(-1, quantum.N_LAYER_ANGLES).sum(axis=0)

    return ad.Node(p, (enc_angles, layer_angles), (grad_enc, grad_layer))


@dataclass
class ForwardResult:
    detection: ad.Node  # the quantum detection map node
    readout: ad.Node  # circuit output after the sigmoid
    track_high: ad.Node
    track_low: ad.Node


def forward(
    params: NetworkParams,
    f_m: np.ndarray,
    f_g: np.ndarray,
    f_s: np.ndarray,
    cube: np.ndarray,
) -> ForwardResult:
    maps = {"M": f_m, "G": f_g, "S": f_s}
    stacks = {}
    for key, degree_map in maps.items():
        token = params.tokens[key] if params.tokens is not None else None
        stacks[key] = deep_fuzzify(
            degree_map, token, params.gauss_anomaly[key], params.gauss_background[key]
        )
    t1, t2, t3 = deep_match_soft(stacks["M"], stacks["G"], stacks["S"])
    t4, t5 = deep_match_crisp(f_m, f_g, f_s, params.conv_high, params.conv_low)
    aggregated = aggregate_features(t1, t2, t3, t4, t5, params)
    selected = band_select(cube, params)
    features = ad.add(aggregated, selected)
    enc_angles = ad.scalar_mul(ad.sigmoid(features), np.pi)
    probability = quantum_readout(enc_angles, params.layer_angles)
    readout = ad.sigmoid(
        ad.scalar_affine(
            ad.affine(probability, 2.0, -1.0), params.readout_scale, params.readout_offset
        )
    )
    detection = ad.hadamard(ad.hadamard(readout, t4), ad.affine(t5, -1.0, 1.0))
    return ForwardResult(detection=detection, readout=readout, track_high=t4, track_low=t5)


def compose_qfd(
    aggregated: ad.Node,
    selected: ad.Node,
    layer_angles: ad.Node,
    readout_scale: ad.Node,
    readout_offset: ad.Node,
    t4: ad.Node,
    t5: ad.Node,
) -> ad.Node:
    """Quantum detection from already-built feature stacks (test surface)."""
    features = ad.add(aggregated, selected)
    enc_angles = ad.scalar_mul(ad.sigmoid(features), np.pi)
    readout = ad.sigmoid(
        ad.scalar_affine(
            ad.affine(quantum_readout(enc_angles, layer_angles), 2.0, -1.0),
            readout_scale,
            readout_offset,
        )
    )
    return ad.hadamard(ad.hadamard(readout, t4), ad.affine(t5, -1.0, 1.0))


# ---------------------------------------------------------------------------
# loss and training


def pseudo_labels(
    classical_map: np.ndarray, e3: float = 0.10, e4: float = 0.10
) -> tuple[np.ndarray, np.ndarray]:
    """Confidence-ranked pseudo labels from the classical detection map.

    The map is binarized with 2-means to count tentative anomaly/background
    pixels; the top ceil(e3 * #anomalies) scores are labeled 1 and the
    bottom ceil(e4 * #background) are labeled 0. Returns (labels, mask).
    """
    d_c = np.asarray(classical_map, dtype=np.float64)
    binary = kmeans_binarize(d_c)
    n_one = int(binary.sum())
    n_zero = binary.size - n_one
    if n_one == 0 or n_zero == 0:
        raise DegenerateSupervisionError(
            "binarized classical map is single-class; cannot build pseudo labels"
        )
    k_top = int(np.ceil(e3 * n_one))
    k_bottom = int(np.ceil(e4 * n_zero))
    order = np.argsort(d_c.ravel(), kind="stable")
    labels = np.zeros(d_c.size)
    mask = np.zeros(d_c.size, dtype=bool)
    mask[order[:k_bottom]] = True
    labels[order[-k_top:]] = 1.0
    mask[order[-k_top:]] = True
    return labels.reshape(d_c.shape), mask.reshape(d_c.shape)


def compute_loss(
    detection: ad.Node, classical_map: np.ndarray, cfg: TrainConfig
) -> ad.Node:
    """Masked binary cross-entropy on pseudo labels plus weighted TV."""
    labels, mask = pseudo_labels(classical_map, cfg.e3, cfg.e4)
    bce = ad.bce_masked(detection, labels, mask)
    return ad.add(bce, ad.scalar_mul(ad.tv_penalty(detection), cfg.lambda_tv))


@dataclass
class TrainResult:
    params: NetworkParams
    detection: np.ndarray
    losses: list[float]
    band_energy: np.ndarray


def train(
    h: Hsi,
    f_m: np.ndarray,
    f_g: np.ndarray,
    f_s: np.ndarray,
    classical_map: np.ndarray,
    cfg: TrainConfig | None = None,
) -> TrainResult:
    """Whole-image Adam training of the quantum decision network.

    Deterministic for a fixed ``cfg.seed``. ``losses`` records the loss
    before every update plus the final loss, so ``losses[-1] < losses[0]``
    states that training made progress.
    """
    cfg = cfg or TrainConfig()
    cube = np.asarray(h.data, dtype=np.float64)
    labels, mask = pseudo_labels(classical_map, cfg.e3, cfg.e4)
    rng = np.random.default_rng(cfg.seed)
    params = init_params(h.height, h.width, h.bands, rng, cfg.use_hesitancy)
    trainables = params.parameters()
    state = ad.AdamState(lr=cfg.lr)
    losses = []
    for _ in range(cfg.epochs):
        result = forward(params, f_m, f_g, f_s, cube)
        loss = ad.add(
            ad.bce_masked(result.detection, labels, mask),
            ad.scalar_mul(ad.tv_penalty(result.detection), cfg.lambda_tv),
        )
        losses.append(float(loss.values))
        ad.zero_grad(trainables)
        ad.backward(loss)
        ad.adam_step(trainables, state)
        for width in params.gauss_widths():
            np.maximum(width.values, MIN_GAUSS_WIDTH, out=width.values)
    result = forward(params, f_m, f_g, f_s, cube)
    final_loss = ad.add(
        ad.bce_masked(result.detection, labels, mask),
        ad.scalar_mul(ad.tv_penalty(result.detection), cfg.lambda_tv),
    )
    losses.append(float(final_loss.values))
    return TrainResult(
        params=params,
        detection=result.detection.values.copy(),
        losses=losses,
        band_energy=band_energy_report(cube, params),
    )


def fuse_detections(classical_map: np.ndarray, quantum_map: np.ndarray) -> np.ndarray:
    """Hadamard fusion of the two detection maps."""
    d_c = np.asarray(classical_map, dtype=np.float64)
    d_q = np.asarray(quantum_map, dtype=np.float64)
    if d_c.shape != d_q.shape:
        raise ValueError(f"detection shapes differ: {d_c.shape} vs {d_q.shape}")
    return d_c * d_q


# ---------------------------------------------------------------------------
# parameter serialization


def save_params(params: NetworkParams, path: str) -> None:
    """Flat little-endian blob: magic, version, flags, then each array as
    (ndim, dims..., float64 payload)."""
    arrays = [node.values for node in params.parameters()]
    with open(path, "wb") as fh:
        fh.write(PARAMS_MAGIC)
        fh.write(struct.pack("<III", PARAMS_VERSION, int(params.use_hesitancy), len(arrays)))
        for a in arrays:
            fh.write(struct.pack("<I", a.ndim))
            fh.write(struct.pack(f"<{max(a.ndim, 0)}I", *a.shape))
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_params_into(params: NetworkParams, path: str) -> NetworkParams:
    """Restore a blob written by :func:`save_params` into a matching layout."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(PARAMS_MAGIC)] != PARAMS_MAGIC:
        raise ValueError("not a network parameter blob (bad magic)")
    pos = len(PARAMS_MAGIC)
    version, hesitancy_flag, count = struct.unpack_from("<III", blob, pos)
    pos += 12
    if version != PARAMS_VERSION:
        raise ValueError(f"unsupported parameter blob version {version}")
    if bool(hesitancy_flag) != params.use_hesitancy:
        raise ValueError("hesitancy flag mismatch between blob and layout")
    nodes = params.parameters()
    if count != len(nodes):
        raise ValueError(f"blob holds {count} arrays, layout expects {len(nodes)}")
    for node in nodes:
        (ndim,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        shape = struct.unpack_from(f"<{ndim}I", blob, pos)
        pos += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(blob, dtype="<f8", count=size, offset=pos).reshape(shape)
        pos += 8 * size
        if data.shape != node.values.shape:
            raise ValueError("parameter shape mismatch while loading blob")
        node.values = data.astype(np.float64).copy()
    return params
