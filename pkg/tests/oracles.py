"""Independent brute-force oracles used to cross-check the implementations.

Each oracle takes a deliberately different route from the code under test:
morphology via threshold decomposition and connected-component labeling,
2-means via exhaustive sorted splits, AUC via pairwise comparisons, the
quantum circuit via dense 16x16 matrix chains, and derivatives via central
finite differences.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import label as cc_label

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


def area_opening_oracle(image: np.ndarray, area_threshold: int) -> np.ndarray:
    """gamma_a(f)(p) = max{v : p in a component of {f >= v} with area >= a}."""
    img = np.asarray(image, dtype=np.float64)
    out = np.full(img.shape, img.min())
    for v in np.unique(img):
        labels, _ = cc_label(img >= v, structure=EIGHT_CONNECTED)
        counts = np.bincount(labels.ravel())
        keep = counts >= area_threshold
        keep[0] = False
        out[keep[labels]] = v
    return out


def area_closing_oracle(image: np.ndarray, area_threshold: int) -> np.ndarray:
    return -area_opening_oracle(-np.asarray(image, dtype=np.float64), area_threshold)


def kmeans_split_oracle(values: np.ndarray) -> np.ndarray:
    """Optimal 1-D 2-partition by exhaustive search over sorted splits."""
    flat = np.asarray(values, dtype=np.float64).ravel()
    order = np.argsort(flat, kind="stable")
    s = flat[order]
    n = s.size
    best_sse = np.inf
    best_k = 1
    for k in range(1, n):
        low, high = s[:k], s[k:]
        sse = ((low - low.mean()) ** 2).sum() + ((high - high.mean()) ** 2).sum()
        if sse < best_sse - 1e-15:
            best_sse = sse
            best_k = k
    mask = np.zeros(n, dtype=np.uint8)
    mask[order[best_k:]] = 1
    return mask.reshape(np.asarray(values).shape)


def pairwise_auc_oracle(scores: np.ndarray, reference: np.ndarray) -> float:
    """Fraction of (anomaly, background) pairs won, ties counting half."""
    s = np.asarray(scores, dtype=np.float64).ravel()
    r = np.asarray(reference).ravel()
    anomaly = s[r != 0]
    background = s[r == 0]
    wins = 0.0
    for a in anomaly:
        wins += float((a > background).sum()) + 0.5 * float((a == background).sum())
    return wins / (anomaly.size * background.size)


# ---------------------------------------------------------------------------
# dense quantum oracle


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def single_qubit_operator(gate: np.ndarray, qubit: int) -> np.ndarray:
    """Embed a 2x2 gate on 1-based ``qubit`` into the 16-dim space.

    Basis |q4 q3 q2 q1> means qubit 1 is the last kron factor.
    """
    op = np.eye(1, dtype=complex)
    for q in (4, 3, 2, 1):
        op = np.kron(op, gate if q == qubit else np.eye(2, dtype=complex))
    return op


def ccnot_matrix(c1: int, c2: int, target: int) -> np.ndarray:
    b1, b2, bt = 1 << (c1 - 1), 1 << (c2 - 1), 1 << (target - 1)
    op = np.zeros((16, 16), dtype=complex)
    for i in range(16):
        j = i ^ bt if (i & b1) and (i & b2) else i
        op[j, i] = 1.0
    return op


def dense_circuit_probability(enc_angles, layer_angles) -> float:
    """Full 16x16 matrix-chain evaluation of the circuit readout."""
    from hsad.quantum import CCNOT_RING, LAYER_AXES

    unitary = np.eye(16, dtype=complex)
    for q in range(1, 5):
        unitary = single_qubit_operator(ry_matrix(enc_angles[q - 1]), q) @ unitary
    for layer, axis in enumerate(LAYER_AXES):
        make = ry_matrix if axis == "Y" else rx_matrix
        for q in range(1, 5):
            gate = make(layer_angles[4 * layer + q - 1])
            unitary = single_qubit_operator(gate, q) @ unitary
    for c1, c2, t in CCNOT_RING:
        unitary = ccnot_matrix(c1, c2, t) @ unitary
    state = unitary[:, 0]  # acting on |0000>
    return float(sum(abs(state[i]) ** 2 for i in range(16) if i & 1))


def central_difference(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of an array."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        plus = x.copy()
        plus[idx] += h
        minus = x.copy()
        minus[idx] -= h
        grad[idx] = (f(plus) - f(minus)) / (2.0 * h)
        it.iternext()
    return grad


def relative_error(a, b, floor: float = 1e-4) -> float:
    """Max relative discrepancy with an absolute floor.

    The floor keeps near-zero coordinates comparable: central differences of
    an O(1) function carry ~1e-11 absolute noise regardless of the true
    gradient magnitude.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float((np.abs(a - b) / denom).max())
