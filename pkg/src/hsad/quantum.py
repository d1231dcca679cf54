"""Exact 4-qubit statevector simulation of the circuit defuzzifier.

Basis states are ordered |q4 q3 q2 q1> with qubit 1 as the least significant
bit, so amplitude index ``i`` assigns qubit ``q`` the bit ``(i >> (q-1)) & 1``.
The circuit applies a per-qubit R_Y feature encoding, three shared rotation
layers (R_Y, R_X, R_Y), a ring of four Toffoli gates, and reads out the
probability of qubit 1 being |1>. Gradients with respect to any rotation
angle follow the exact parameter-shift rule.

Gate functions accept amplitude arrays with arbitrary leading batch
dimensions, so whole images (and all parameter-shift variants at once)
evaluate in a handful of vectorized passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

N_QUBITS = 4
DIM = 16
N_LAYER_ANGLES = 12
LAYER_AXES = ("Y", "X", "Y")
# (control, control, target), 1-based qubit labels
CCNOT_RING = ((1, 2, 3), (2, 3, 4), (3, 4, 1), (4, 1, 2))

_READOUT_ODD = np.array([i for i in range(DIM) if i & 1])


def _ring_readout_indices() -> np.ndarray:
    """Basis indices whose amplitude lands on an odd index after the ring.

    The Toffoli ring only permutes basis states, so the readout probability
    can be taken from the pre-ring state through this fixed index set. The
    set is ordered by the post-ring index, keeping the summation order (and
    with it, every bit of the result) identical to the post-ring readout.
    """
    final = np.arange(DIM)
    for c1, c2, t in CCNOT_RING:
        b1, b2, bt = 1 << (c1 - 1), 1 << (c2 - 1), 1 << (t - 1)
        final = np.array([i ^ bt if (i & b1) and (i & b2) else i for i in final])
    inverse = np.empty(DIM, dtype=int)
    inverse[final] = np.arange(DIM)
    return np.array([inverse[j] for j in range(DIM) if j & 1])


_PRE_RING_ODD = _ring_readout_indices()


def zero_state(batch_shape=()) -> np.ndarray:
    """|0000> amplitudes, optionally replicated over leading batch axes."""
    amp = np.zeros(tuple(batch_shape) + (DIM,), dtype=np.complex128)
    amp[..., 0] = 1.0
    return amp


def _check_qubit(qubit: int):
    if qubit not in (1, 2, 3, 4):
        raise ValueError(f"qubit index must be in 1..4, got {qubit}")


def _rotate_inplace(flat: np.ndarray, qubit: int, axis: str, theta, scratch=None) -> None:
    """Apply R_X/R_Y on ``qubit`` to (..., 16) amplitudes, in place.

    ``theta`` is a scalar or an array matching the batch shape. ``scratch``
    may hold two preallocated half-state buffers to avoid temporaries in
    hot loops.
    """
    batch = flat.shape[:-1]
    view = flat.reshape(batch + (2, 2, 2, 2))
    moved = np.moveaxis(view, view.ndim - qubit, -1)
    a0 = moved[..., 0]
    a1 = moved[..., 1]
    theta = np.asarray(theta, dtype=np.float64)
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    if theta.ndim:
        # broadcast over the three remaining qubit axes
        c = c.reshape(c.shape + (1, 1, 1))
        s = s.reshape(s.shape + (1, 1, 1))
    if scratch is None:
        t0 = np.empty(batch + (2, 2, 2), dtype=np.complex128)
        t1 = np.empty(batch + (2, 2, 2), dtype=np.complex128)
    else:
        t0, t1 = scratch
    if axis == "Y":
        np.multiply(a0, c, out=t0)
        np.multiply(a1, s, out=t1)
        t0 -= t1
        a1 *= c
        np.multiply(a0, s, out=t1)
        a1 += t1
    elif axis == "X":
        np.multiply(a0, c, out=t0)
        np.multiply(a1, s, out=t1)
        t1 *= 1j
        t0 -= t1
        a1 *= c
        np.multiply(a0, s, out=t1)
        t1 *= 1j
        a1 -= t1
    else:
        raise ValueError(f"axis must be 'X' or 'Y', got {axis!r}")
    a0[...] = t0


def _scratch_for(flat: np.ndarray):
    shape = flat.shape[:-1] + (2, 2, 2)
    return np.empty(shape, dtype=np.complex128), np.empty(shape, dtype=np.complex128)


def _ccnot_inplace(flat: np.ndarray, c1: int, c2: int, target: int) -> None:
    b1 = 1 << (c1 - 1)
    b2 = 1 << (c2 - 1)
    bt = 1 << (target - 1)
    for i in range(DIM):
        if (i & b1) and (i & b2) and not (i & bt):
            j = i | bt
            tmp = flat[..., i].copy()
            flat[..., i] = flat[..., j]
            flat[..., j] = tmp


def apply_rotation(state: np.ndarray, qubit: int, axis: str, theta) -> np.ndarray:
    """Single-qubit R_X or R_Y rotation; ``theta`` may be batched."""
    _check_qubit(qubit)
    amp = np.array(state, dtype=np.complex128, copy=True)
    _rotate_inplace(amp, qubit, axis.upper(), theta)
    return amp


def apply_ccnot(state: np.ndarray, controls, target: int) -> np.ndarray:
    """Toffoli gate: flip the target wherever both controls read 1."""
    c1, c2 = controls
    if len({c1, c2, target}) != 3:
        raise ValueError(f"qubits must be distinct, got {c1}, {c2}, {target}")
    for q in (c1, c2, target):
        _check_qubit(q)
    amp = np.array(state, dtype=np.complex128, copy=True)
    _ccnot_inplace(amp, c1, c2, target)
    return amp


def _encode_inplace(flat: np.ndarray, angles: np.ndarray, scratch=None) -> None:
    for q in range(1, N_QUBITS + 1):
        _rotate_inplace(flat, q, "Y", angles[..., q - 1], scratch)


def _layers_and_ring_inplace(flat: np.ndarray, layer_angles: np.ndarray, scratch=None) -> None:
    """The shared part of the circuit: three rotation layers plus the ring.

    ``layer_angles`` is (12,) for one shared configuration or batch + (12,)
    for per-batch configurations.
    """
    batched = layer_angles.ndim > 1
    for layer, axis in enumerate(LAYER_AXES):
        for q in range(1, N_QUBITS + 1):
            theta = layer_angles[..., 4 * layer + q - 1] if batched else layer_angles[
                4 * layer + q - 1
            ]
            _rotate_inplace(flat, q, axis, theta, scratch)
    for c1, c2, t in CCNOT_RING:
        _ccnot_inplace(flat, c1, c2, t)


def encode_angles(angles: np.ndarray) -> np.ndarray:
    """Prepare |0000> then rotate each qubit by its encoding angle (R_Y)."""
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape[-1] != N_QUBITS:
        raise ValueError(f"need {N_QUBITS} encoding angles, got shape {angles.shape}")
    state = zero_state(angles.shape[:-1])
    _encode_inplace(state, angles)
    return state


def features_to_angles(features: np.ndarray) -> np.ndarray:
    """Bounded feature encoding: angle = pi * sigmoid(feature)."""
    f = np.asarray(features, dtype=np.float64)
    return np.pi / (1.0 + np.exp(-f))


def encode_features(features: np.ndarray) -> np.ndarray:
    return encode_angles(features_to_angles(features))


def _ordered_mass(state: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Sum |amplitude|^2 over ``indices`` in a fixed left-to-right order, so
    batched and per-pixel evaluations are bit-identical."""
    sq = state[..., indices]
    sq = sq.real**2 + sq.imag**2
    total = sq[..., 0]
    for k in range(1, indices.size):
        total = total + sq[..., k]
    return total


def probability_one(state: np.ndarray, qubit: int = 1) -> np.ndarray:
    """P(measuring ``qubit`` in |1>) from the amplitudes."""
    if qubit == 1:
        return _ordered_mass(state, _READOUT_ODD)
    _check_qubit(qubit)
    bit = 1 << (qubit - 1)
    return _ordered_mass(state, np.array([i for i in range(DIM) if i & bit]))


def circuit_probability(enc_angles: np.ndarray, layer_angles: np.ndarray) -> np.ndarray:
    """Readout probability of the full circuit for given angles.

    ``enc_angles`` is (..., 4); ``layer_angles`` holds the 12 shared rotation
    angles ordered layer-major (layer 1 qubits 1..4, then layers 2 and 3).
    """
    layer_angles = np.asarray(layer_angles, dtype=np.float64)
    if layer_angles.shape != (N_LAYER_ANGLES,):
        raise ValueError(f"expected {N_LAYER_ANGLES} layer angles, got {layer_angles.shape}")
    state = encode_angles(enc_angles)
    _layers_and_ring_inplace(state, layer_angles)
    return probability_one(state, qubit=1)


@dataclass
class CircuitParams:
    """Shared rotation angles plus the trainable readout affine."""

    layer_angles: np.ndarray = field(default_factory=lambda: np.zeros(N_LAYER_ANGLES))
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        self.layer_angles = np.asarray(self.layer_angles, dtype=np.float64)
        if self.layer_angles.shape != (N_LAYER_ANGLES,):
            raise ValueError(
                f"expected {N_LAYER_ANGLES} layer angles, got {self.layer_angles.shape}"
            )


def run_circuit(features: np.ndarray, params: CircuitParams) -> float:
    """Features -> encoded state -> layers -> entanglement -> sigmoid readout."""
    p = circuit_probability(features_to_angles(features), params.layer_angles)
    z = params.scale * (2.0 * p - 1.0) + params.offset
    out = 1.0 / (1.0 + np.exp(-z))
    return float(out) if np.ndim(out) == 0 else out


def _pre_ring_probability(state: np.ndarray) -> np.ndarray:
    """Readout probability taken just before the Toffoli ring."""
    return _ordered_mass(state, _PRE_RING_ODD)


def _gate_slot(g: int):
    """Qubit and axis of the g-th shared rotation (g in 0..11)."""
    return g % 4 + 1, LAYER_AXES[g // 4]


def shift_gradients(
    enc_angles: np.ndarray, layer_angles: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Probability and its exact derivatives for every rotation angle.

    Returns (P, dP/denc with shape (..., 4), dP/dlayer with shape (..., 12)),
    each derivative computed as [P(theta + pi/2) - P(theta - pi/2)] / 2.

    Work is shared aggressively: encoding shifts reuse the encoded state
    (rotations on one qubit compose additively), layer shifts restart from a
    snapshot taken just before the shifted gate, and the readout is folded
    through the ring permutation.
    """
    enc_angles = np.asarray(enc_angles, dtype=np.float64)
    layer_angles = np.asarray(layer_angles, dtype=np.float64)
    if layer_angles.shape != (N_LAYER_ANGLES,):
        raise ValueError(f"expected {N_LAYER_ANGLES} layer angles, got {layer_angles.shape}")
    batch = enc_angles.shape[:-1]
    encoded = encode_angles(enc_angles)

    # forward pass, snapshotting the state before every shared rotation
    state = encoded.copy()
    single_scratch = _scratch_for(state)
    snapshots = []
    for g in range(N_LAYER_ANGLES):
        snapshots.append(state.copy())
        qubit, axis = _gate_slot(g)
        _rotate_inplace(state, qubit, axis, layer_angles[g], single_scratch)
    p = _pre_ring_probability(state)

    pair_shift = np.array([np.pi / 2.0, -np.pi / 2.0]).reshape((2,) + (1,) * len(batch))
    pair = np.empty((2,) + batch + (DIM,), dtype=np.complex128)
    pair_scratch = _scratch_for(pair)
    d_layer = np.empty(batch + (N_LAYER_ANGLES,))
    for g in range(N_LAYER_ANGLES):
        pair[0] = snapshots[g]
        pair[1] = snapshots[g]
        qubit, axis = _gate_slot(g)
        _rotate_inplace(pair, qubit, axis, layer_angles[g] + pair_shift, pair_scratch)
        for g2 in range(g + 1, N_LAYER_ANGLES):
            qubit2, axis2 = _gate_slot(g2)
            _rotate_inplace(pair, qubit2, axis2, layer_angles[g2], pair_scratch)
        pp = _pre_ring_probability(pair)
        d_layer[..., g] = (pp[0] - pp[1]) / 2.0

    # encoding shifts: one extra +-pi/2 R_Y per config on the shared encoding
    enc_states = np.empty((2 * N_QUBITS,) + batch + (DIM,), dtype=np.complex128)
    for q in range(N_QUBITS):
        for sign, row in ((+1.0, 2 * q), (-1.0, 2 * q + 1)):
            enc_states[row] = encoded
            _rotate_inplace(enc_states[row], q + 1, "Y", sign * np.pi / 2.0, single_scratch)
    enc_scratch = _scratch_for(enc_states)
    for g in range(N_LAYER_ANGLES):
        qubit, axis = _gate_slot(g)
        _rotate_inplace(enc_states, qubit, axis, layer_angles[g], enc_scratch)
    p_enc = _pre_ring_probability(enc_states)
    d_enc = np.empty(batch + (N_QUBITS,))
    for q in range(N_QUBITS):
        d_enc[..., q] = (p_enc[2 * q] - p_enc[2 * q + 1]) / 2.0
    return p, d_enc, d_layer


def parameter_shift_grad(
    enc_angles: np.ndarray,
    layer_angles: np.ndarray,
    kind: str,
    index: int,
) -> float:
    """dP/dtheta for one angle: ``kind`` is 'layer' (index 0..11) or
    'encoding' (index 0..3)."""
    enc_angles = np.asarray(enc_angles, dtype=np.float64)
    if kind == "layer":
        if not 0 <= index < N_LAYER_ANGLES:
            raise ValueError(f"layer index out of range: {index}")
        plus = np.array(layer_angles, dtype=np.float64)
        plus[index] += np.pi / 2.0
        minus = np.array(layer_angles, dtype=np.float64)
        minus[index] -= np.pi / 2.0
        return float(
            (circuit_probability(enc_angles, plus) - circuit_probability(enc_angles, minus))
            / 2.0
        )
    if kind == "encoding":
        if not 0 <= index < N_QUBITS:
            raise ValueError(f"encoding index out of range: {index}")
        plus = enc_angles.copy()
        plus[..., index] += np.pi / 2.0
        minus = enc_angles.copy()
        minus[..., index] -= np.pi / 2.0
        return float(
            (circuit_probability(plus, layer_angles) - circuit_probability(minus, layer_angles))
            / 2.0
        )
    raise ValueError(f"kind must be 'layer' or 'encoding', got {kind!r}")
