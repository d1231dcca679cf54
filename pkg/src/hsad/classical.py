"""Unsupervised classical fuzzy decision engine.

Five rules over the three membership maps: three pairwise "both properties
high" rules kept soft, plus two high-confidence rules ("all high" / "all
low") binarized by 1-D 2-means. Soft conclusions are cross-combined with the
fuzzy disjunction, averaged with equal confidence, patched by the crisp
index sets, contrast-stretched with a fitted exponential, and smoothed by a
self-guided filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fuzzy_ops import operator_pair
from .guided_filter import guided_filter
from .hsi import Hsi
from .membership import membership_maps

GDM_INIT_ALPHA = 1.0
GDM_LEARNING_RATE = 2.0
GDM_MAX_ITER = 10_000


@dataclass
class RuleConclusions:
    """Soft conclusions of the pairwise rules and the two binarized masks."""

    pair_ms: np.ndarray
    pair_mg: np.ndarray
    pair_gs: np.ndarray
    anomaly_mask: np.ndarray
    background_mask: np.ndarray


def _check_same_shape(*maps):
    shapes = {m.shape for m in maps}
    if len(shapes) != 1:
        raise ValueError(f"degree maps differ in shape: {sorted(shapes)}")


def kmeans_binarize(values: np.ndarray) -> np.ndarray:
    """Exact 1-D 2-means thresholding; the larger-center cluster maps to 1.

    The optimal two-cluster partition of scalars is contiguous in sorted
    order, so the global optimum of the k-means objective is found by a
    prefix-sum scan over every split (first minimal split on ties). A
    constant map carries no separation and yields all zeros, except for an
    exactly-one map, which states full certainty and stays all ones.
    """
    v = np.asarray(values, dtype=np.float64)
    lo = v.min()
    hi = v.max()
    if hi == lo:
        return np.full(v.shape, 1 if lo == 1.0 else 0, dtype=np.uint8)
    flat = v.ravel()
    order = np.argsort(flat, kind="stable")
    s = flat[order]
    n = s.size
    csum = np.cumsum(s)
    csq = np.cumsum(s * s)
    k = np.arange(1, n)
    low_sse = csq[:-1] - csum[:-1] ** 2 / k
    high_sum = csum[-1] - csum[:-1]
    high_sse = (csq[-1] - csq[:-1]) - high_sum**2 / (n - k)
    best = int(np.argmin(low_sse + high_sse)) + 1
    mask = np.zeros(n, dtype=np.uint8)
    mask[order[best:]] = 1
    return mask.reshape(v.shape)


def match_rules(
    f_m: np.ndarray, f_g: np.ndarray, f_s: np.ndarray, ops: str = "einstein"
) -> RuleConclusions:
    """Match all five rules; the consequent is an identity scaling, so the
    soft conclusions equal the matching degrees."""
    _check_same_shape(f_m, f_g, f_s)
    t, _ = operator_pair(ops)
    all_high = t(t(f_m, f_g), f_s)
    all_low = t(t(1.0 - f_m, 1.0 - f_g), 1.0 - f_s)
    return RuleConclusions(
        pair_ms=t(f_m, f_s),
        pair_mg=t(f_m, f_g),
        pair_gs=t(f_g, f_s),
        anomaly_mask=kmeans_binarize(all_high),
        background_mask=kmeans_binarize(all_low),
    )


def cross_integrate(
    c1_in: np.ndarray, c2_in: np.ndarray, c3_in: np.ndarray, ops: str = "einstein"
) -> np.ndarray:
    """Disjoin the soft conclusions pairwise, then average with equal votes."""
    _check_same_shape(c1_in, c2_in, c3_in)
    _, s = operator_pair(ops)
    combined = s(c1_in, c3_in) + s(c1_in, c2_in) + s(c2_in, c3_in)
    return combined / 3.0


def index_combine(
    cbar: np.ndarray,
    anomaly_mask: np.ndarray,
    background_mask: np.ndarray,
    e1: float = 0.2,
    e2: float = 0.2,
) -> np.ndarray:
    """Pin the most confident crisp pixels to 0/1, keep the average elsewhere.

    A pixel claimed by both branches resolves to anomaly.
    """
    _check_same_shape(cbar, anomaly_mask, background_mask)
    if not (0.0 <= e1 <= 1.0 and 0.0 <= e2 <= 1.0):
        raise ValueError(f"fractions must lie in [0, 1], got e1={e1}, e2={e2}")
    out = np.array(cbar, dtype=np.float64)
    flat = out.ravel()
    order = np.argsort(flat, kind="stable")

    n_background = int(background_mask.sum())
    k_low = int(np.ceil(e2 * n_background))
    if k_low:
        lowest = np.zeros(flat.size, dtype=bool)
        lowest[order[:k_low]] = True
        out[lowest.reshape(out.shape) & (background_mask == 1)] = 0.0

    n_anomaly = int(anomaly_mask.sum())
    k_high = int(np.ceil(e1 * n_anomaly))
    if k_high:
        highest = np.zeros(flat.size, dtype=bool)
        highest[order[-k_high:]] = True
        out[highest.reshape(out.shape) & (anomaly_mask == 1)] = 1.0
    return out


def select_fmax(f_m: np.ndarray, f_g: np.ndarray, f_s: np.ndarray) -> np.ndarray:
    """The degree map with the largest energy (sum of squares); ties keep
    the earlier map in (morphological, geometrical, statistical) order."""
    _check_same_shape(f_m, f_g, f_s)
    candidates = (f_m, f_g, f_s)
    energies = [float((m * m).sum()) for m in candidates]
    return candidates[int(np.argmax(energies))]


def _contrast_objective(alpha, c_flat, target_flat):
    r = 1.0 - np.exp(-alpha * c_flat) - target_flat
    return 0.5 * float(r @ r)


def fit_ec_alpha(
    values: np.ndarray,
    target: np.ndarray,
    init_alpha: float = GDM_INIT_ALPHA,
    learning_rate: float = GDM_LEARNING_RATE,
    max_iter: int = GDM_MAX_ITER,
    return_trace: bool = False,
):
    """Fit the exponent of 1 - exp(-alpha*C) to the highest-energy map.

    Plain gradient descent (step 2, at most 1e4 iterations by default) with
    the step halved whenever it would increase the objective; the result is
    projected onto alpha >= 0. With ``return_trace`` the per-iteration
    objective values come back too (non-increasing by construction).
    """
    _check_same_shape(values, target)
    c_flat = np.asarray(values, dtype=np.float64).ravel()
    target_flat = np.asarray(target, dtype=np.float64).ravel()
    alpha = float(init_alpha)
    step = float(learning_rate)
    objective = _contrast_objective(alpha, c_flat, target_flat)
    trace = [objective]
    tol = 1e-10 * c_flat.size
    for _ in range(max_iter):
        decay = np.exp(-alpha * c_flat)
        grad = float(((1.0 - decay - target_flat) * c_flat) @ decay)
        if abs(grad) < tol:
            break
        while step > 1e-16:
            candidate = alpha - step * grad
            cand_obj = _contrast_objective(candidate, c_flat, target_flat)
            if cand_obj <= objective:
                alpha, objective = candidate, cand_obj
                trace.append(objective)
                break
            step /= 2.0
        else:
            break
    result = max(alpha, 0.0)
    return (result, trace) if return_trace else result


def ec_enhance(values: np.ndarray, alpha: float) -> np.ndarray:
    """Exponential contrast stretch 1 - exp(-alpha * C)."""
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    return 1.0 - np.exp(-alpha * np.asarray(values, dtype=np.float64))


def classical_detect_from_degrees(
    f_m: np.ndarray,
    f_g: np.ndarray,
    f_s: np.ndarray,
    ops: str = "einstein",
    e1: float = 0.2,
    e2: float = 0.2,
    gf_radius: int = 4,
    gf_eps: float = 1e-3,
    gdm_init_alpha: float = GDM_INIT_ALPHA,
    gdm_lr: float = GDM_LEARNING_RATE,
    gdm_max_iter: int = GDM_MAX_ITER,
) -> tuple[np.ndarray, float]:
    """Run the rule engine on precomputed degree maps; returns (map, alpha)."""
    rules = match_rules(f_m, f_g, f_s, ops)
    cbar = cross_integrate(rules.pair_ms, rules.pair_mg, rules.pair_gs, ops)
    combined = index_combine(cbar, rules.anomaly_mask, rules.background_mask, e1, e2)
    alpha = fit_ec_alpha(
        combined,
        select_fmax(f_m, f_g, f_s),
        init_alpha=gdm_init_alpha,
        learning_rate=gdm_lr,
        max_iter=gdm_max_iter,
    )
    enhanced = ec_enhance(combined, alpha)
    return guided_filter(enhanced, enhanced, gf_radius, gf_eps), alpha


def classical_detect(
    h: Hsi,
    ops: str = "einstein",
    area_threshold: int | None = None,
    n_endmembers: int = 4,
    sigma: float = 5.0,
    e1: float = 0.2,
    e2: float = 0.2,
    gf_radius: int = 4,
    gf_eps: float = 1e-3,
) -> np.ndarray:
    """Full classical pipeline from cube to detection map."""
    f_m, f_g, f_s = membership_maps(h, area_threshold, n_endmembers, sigma)
    detection, _ = classical_detect_from_degrees(
        f_m, f_g, f_s, ops, e1, e2, gf_radius, gf_eps
    )
    return detection
