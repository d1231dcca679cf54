"""Scalar fuzzy connectives applied elementwise to degree maps.

The Einstein product/sum are the default conjunction/disjunction pair; the
min/max pair is kept for ablation runs. Both pairs are De Morgan duals
under the 1 - x complement.
"""

from __future__ import annotations

import numpy as np

# Floating-point drift allowed on [0, 1] inputs before raising.
DRIFT_TOL = 1e-9


def _as_degree(x):
    a = np.asarray(x, dtype=np.float64)
    if a.size and (a.min() < -DRIFT_TOL or a.max() > 1.0 + DRIFT_TOL):
        raise ValueError(
            f"degree out of [0, 1]: range [{a.min()}, {a.max()}]"
        )
    return np.clip(a, 0.0, 1.0)


def _maybe_scalar(a, like):
    return float(a) if np.isscalar(like) or np.ndim(like) == 0 else a


def einstein_product(x, y):
    """x*y / (2 - (x + y - x*y)); t-norm with identity 1 and annihilator 0."""
    a = _as_degree(x)
    b = _as_degree(y)
    out = (a * b) / (2.0 - (a + b - a * b))
    return _maybe_scalar(out, x)


def einstein_sum(x, y):
    """(x + y) / (1 + x*y); t-conorm dual to the Einstein product."""
    a = _as_degree(x)
    b = _as_degree(y)
    out = (a + b) / (1.0 + a * b)
    return _maybe_scalar(out, x)


def complement(x):
    """1 - x."""
    return _maybe_scalar(1.0 - _as_degree(x), x)


def min_t(x, y):
    """Minimum t-norm (ablation operator)."""
    return _maybe_scalar(np.minimum(_as_degree(x), _as_degree(y)), x)


def max_s(x, y):
    """Maximum t-conorm (ablation operator)."""
    return _maybe_scalar(np.maximum(_as_degree(x), _as_degree(y)), x)


# name -> (conjunction, disjunction)
OPERATOR_PAIRS = {
    "einstein": (einstein_product, einstein_sum),
    "minmax": (min_t, max_s),
}


def operator_pair(name: str):
    try:
        return OPERATOR_PAIRS[name]
    except KeyError:
        raise ValueError(
            f"unknown operator pair {name!r}, expected one of {sorted(OPERATOR_PAIRS)}"
        ) from None
