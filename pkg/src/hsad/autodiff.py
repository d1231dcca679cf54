"""Minimal reverse-mode automatic differentiation over dense numpy arrays.

Each operation returns a new :class:`Node` holding forward values plus one
closure per parent that maps an upstream gradient to that parent's
contribution. ``backward`` runs a reverse topological sweep from a scalar
loss. Shapes are explicit everywhere; the only implicit broadcast is
scalar * array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class Node:
    """A value in the computation graph."""

    __slots__ = ("values", "grad", "parents", "grad_fns", "requires_grad")

    def __init__(self, values, parents=(), grad_fns=(), requires_grad=False):
        self.values = np.asarray(values, dtype=np.float64)
        self.parents = tuple(parents)
        self.grad_fns = tuple(grad_fns)
        self.requires_grad = requires_grad or any(p.requires_grad for p in self.parents)
        self.grad = None

    @property
    def shape(self):
        return self.values.shape

    def __repr__(self):
        return f"Node(shape={self.values.shape}, requires_grad={self.requires_grad})"


def parameter(values) -> Node:
    """A trainable leaf."""
    return Node(values, requires_grad=True)


def constant(values) -> Node:
    """A non-trainable leaf."""
    return Node(values)


def zero_grad(nodes) -> None:
    for n in nodes:
        n.grad = None


def _check_shapes(a: Node, b: Node, op: str):
    if a.values.shape != b.values.shape:
        raise ValueError(f"{op}: shape mismatch {a.values.shape} vs {b.values.shape}")


def _topo_order(root: Node) -> list[Node]:
    order = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen or not node.requires_grad:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))
    return order


def backward(loss: Node) -> None:
    """Populate ``grad`` on every requires_grad node reachable from ``loss``.

    Gradients add into any existing ``grad`` arrays; call :func:`zero_grad`
    between passes that should not accumulate.
    """
    if loss.values.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.values.shape}")
    order = _topo_order(loss)
    sweep = {id(loss): np.ones_like(loss.values)}
    for node in reversed(order):
        g = sweep.get(id(node))
        if g is None:
            continue
        for parent, fn in zip(node.parents, node.grad_fns):
            if not parent.requires_grad:
                continue
            contribution = fn(g)
            acc = sweep.get(id(parent))
            if acc is None:
                sweep[id(parent)] = np.array(contribution, dtype=np.float64)
            else:
                acc += contribution
    for node in order:
        g = sweep.get(id(node))
        if g is None:
            continue
        if node.grad is None:
            node.grad = np.zeros_like(node.values)
        node.grad += g


# ---------------------------------------------------------------------------
# primitives


def add(a: Node, b: Node) -> Node:
    _check_shapes(a, b, "add")
    return Node(a.values + b.values, (a, b), (lambda g: g, lambda g: g))


def subtract(a: Node, b: Node) -> Node:
    _check_shapes(a, b, "subtract")
    return Node(a.values - b.values, (a, b), (lambda g: g, lambda g: -g))


def hadamard(a: Node, b: Node) -> Node:
    _check_shapes(a, b, "hadamard")
    return Node(
        a.values * b.values,
        (a, b),
        (lambda g: g * b.values, lambda g: g * a.values),
    )


def scalar_mul(a: Node, c: float) -> Node:
    c = float(c)
    return Node(c * a.values, (a,), (lambda g: c * g,))


def affine(a: Node, scale: float, shift: float) -> Node:
    """scale * a + shift with plain float coefficients."""
    scale = float(scale)
    return Node(scale * a.values + float(shift), (a,), (lambda g: scale * g,))


def scalar_affine(a: Node, scale: Node, shift: Node) -> Node:
    """scale * a + shift with trainable scalar coefficients."""
    if scale.values.size != 1 or shift.values.size != 1:
        raise ValueError("scalar_affine coefficients must be scalars")
    s = float(scale.values)
    return Node(
        s * a.values + float(shift.values),
        (a, scale, shift),
        (
            lambda g: s * g,
            lambda g: np.asarray((g * a.values).sum()),
            lambda g: np.asarray(g.sum()),
        ),
    )


def relu(a: Node) -> Node:
    keep = a.values > 0
    return Node(np.where(keep, a.values, 0.0), (a,), (lambda g: g * keep,))


def leaky_relu(a: Node, slope: float = 0.2) -> Node:
    factor = np.where(a.values > 0, 1.0, float(slope))
    return Node(a.values * factor, (a,), (lambda g: g * factor,))


def sigmoid(a: Node) -> Node:
    y = 1.0 / (1.0 + np.exp(-a.values))
    return Node(y, (a,), (lambda g: g * y * (1.0 - y),))


def soft_round(a: Node, sharpness: float = 10.0) -> Node:
    """Differentiable certainty sharpening: sigmoid(k * (x - 0.5))."""
    k = float(sharpness)
    y = 1.0 / (1.0 + np.exp(-k * (a.values - 0.5)))
    return Node(y, (a,), (lambda g: g * k * y * (1.0 - y),))


def softmax_channels(a: Node) -> Node:
    """Softmax over the last axis."""
    shifted = a.values - a.values.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)

    def grad(g):
        inner = (g * y).sum(axis=-1, keepdims=True)
        return y * (g - inner)

    return Node(y, (a,), (grad,))


def gaussian_mf(x: Node, m: Node, s: Node) -> Node:
    """exp(-(x - m)^2 / (2 s^2)) with trainable scalar center and width."""
    if m.values.size != 1 or s.values.size != 1:
        raise ValueError("gaussian_mf center and width must be scalars")
    mv = float(m.values)
    sv = float(s.values)
    diff = x.values - mv
    y = np.exp(-(diff * diff) / (2.0 * sv * sv))
    return Node(
        y,
        (x, m, s),
        (
            lambda g: g * y * (-diff / (sv * sv)),
            lambda g: np.asarray((g * y * diff / (sv * sv)).sum()),
            lambda g: np.asarray((g * y * diff * diff / (sv**3)).sum()),
        ),
    )


def concat_channels(parts) -> Node:
    """Stack (H, W) maps and/or (H, W, K) stacks along a trailing channel axis."""
    parts = list(parts)
    base = parts[0].values.shape[:2]
    blocks = []
    widths = []
    for p in parts:
        if p.values.shape[:2] != base:
            raise ValueError("concat_channels: spatial shapes differ")
        if p.values.ndim == 2:
            blocks.append(p.values[:, :, None])
            widths.append(1)
        elif p.values.ndim == 3:
            blocks.append(p.values)
            widths.append(p.values.shape[2])
        else:
            raise ValueError(f"concat_channels: bad rank {p.values.ndim}")
    offsets = np.cumsum([0] + widths)

    def make_grad(i):
        lo, hi = offsets[i], offsets[i + 1]
        two_d = parts[i].values.ndim == 2

        def grad(g):
            piece = g[:, :, lo:hi]
            return piece[:, :, 0] if two_d else piece

        return grad

    return Node(
        np.concatenate(blocks, axis=2),
        tuple(parts),
        tuple(make_grad(i) for i in range(len(parts))),
    )


def take_channel(a: Node, index: int) -> Node:
    if a.values.ndim != 3:
        raise ValueError("take_channel expects an (H, W, K) stack")

    def grad(g):
        out = np.zeros_like(a.values)
        out[:, :, index] = g
        return out

    return Node(a.values[:, :, index], (a,), (grad,))


def channel_linear(x: Node, w: Node, b: Node) -> Node:
    """Per-pixel linear map over channels: (H, W, Ci) -> (H, W, Co).

    This is a 1x1 convolution with weight (Co, Ci) and bias (Co,).
    """
    if x.values.ndim != 3:
        raise ValueError("channel_linear expects an (H, W, C) stack")
    co, ci = w.values.shape
    if x.values.shape[2] != ci:
        raise ValueError(f"channel_linear: {x.values.shape[2]} channels vs weight {ci}")
    if b.values.shape != (co,):
        raise ValueError(f"channel_linear: bias shape {b.values.shape} != ({co},)")
    y = np.einsum("hwc,oc->hwo", x.values, w.values) + b.values
    return Node(
        y,
        (x, w, b),
        (
            lambda g: np.einsum("hwo,oc->hwc", g, w.values),
            lambda g: np.einsum("hwo,hwc->oc", g, x.values),
            lambda g: g.sum(axis=(0, 1)),
        ),
    )


def depthwise_scale(x: Node, w: Node, b: Node) -> Node:
    """Independent scalar weight and bias per channel."""
    if x.values.ndim != 3:
        raise ValueError("depthwise_scale expects an (H, W, C) stack")
    c = x.values.shape[2]
    if w.values.shape != (c,) or b.values.shape != (c,):
        raise ValueError("depthwise_scale: weight/bias must be (C,)")
    return Node(
        x.values * w.values + b.values,
        (x, w, b),
        (
            lambda g: g * w.values,
            lambda g: (g * x.values).sum(axis=(0, 1)),
            lambda g: g.sum(axis=(0, 1)),
        ),
    )


def tv_penalty(a: Node) -> Node:
    """Anisotropic total variation, forward differences, averaged over pixels."""
    if a.values.ndim != 2:
        raise ValueError("tv_penalty expects an (H, W) map")
    v = a.values
    n = v.size
    dh = v[:, 1:] - v[:, :-1]
    dv = v[1:, :] - v[:-1, :]
    value = (np.abs(dh).sum() + np.abs(dv).sum()) / n

    def grad(g):
        scale = float(g) / n
        out = np.zeros_like(v)
        sh = np.sign(dh)
        out[:, 1:] += sh
        out[:, :-1] -= sh
        sv = np.sign(dv)
        out[1:, :] += sv
        out[:-1, :] -= sv
        return scale * out

    return Node(value, (a,), (grad,))


BCE_CLAMP = 1e-7


def bce_masked(pred: Node, labels: np.ndarray, mask: np.ndarray) -> Node:
    """Binary cross-entropy averaged over the masked pixels only."""
    labels = np.asarray(labels, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if pred.values.shape != labels.shape or pred.values.shape != mask.shape:
        raise ValueError("bce_masked: prediction, labels and mask shapes differ")
    count = int(mask.sum())
    if count == 0:
        raise ValueError("bce_masked: empty mask")
    p = np.clip(pred.values, BCE_CLAMP, 1.0 - BCE_CLAMP)
    inside = (pred.values > BCE_CLAMP) & (pred.values < 1.0 - BCE_CLAMP)
    terms = -(labels * np.log(p) + (1.0 - labels) * np.log(1.0 - p))
    value = terms[mask].sum() / count

    def grad(g):
        d = np.where(mask & inside, (p - labels) / (p * (1.0 - p)), 0.0)
        return float(g) * d / count

    return Node(value, (pred,), (grad,))


def total(a: Node) -> Node:
    """Sum of all elements (scalar)."""
    return Node(a.values.sum(), (a,), (lambda g: np.full_like(a.values, float(g)),))


# ---------------------------------------------------------------------------
# optimizer


@dataclass
class AdamState:
    lr: float = 3.5e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    first_moment: list = field(default_factory=list)
    second_moment: list = field(default_factory=list)


def adam_step(params, state: AdamState) -> None:
    """One bias-corrected Adam update, in place on the parameter values."""
    params = list(params)
    if not state.first_moment:
        state.first_moment = [np.zeros_like(p.values) for p in params]
        state.second_moment = [np.zeros_like(p.values) for p in params]
    if len(state.first_moment) != len(params):
        raise ValueError("optimizer state does not match the parameter list")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for p, m, v in zip(params, state.first_moment, state.second_moment):
        g = p.grad
        if g is None:
            continue
        if g.shape != p.values.shape:
            raise ValueError("gradient shape does not match parameter shape")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p.values -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
