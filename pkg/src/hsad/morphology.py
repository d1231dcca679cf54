"""Area attribute opening and closing of grayscale maps via max-trees.

A max-tree arranges the connected components of every upper level set of an
image by inclusion: each pixel points to a parent at an equal or lower gray
level, and the component a pixel belongs to at its own level is the subtree
hanging off its canonical node. Filtering with an area criterion then reads
the image back with every bright structure smaller than the threshold
flattened onto the first ancestor that is large enough. The closing is the
dual operator, obtained by negating the input.

The tree is built with the union-find sweep of Berger et al.: pixels are
visited from the highest gray level down, each new pixel adopting the roots
of already-processed neighbors. Connectivity is 8-connected throughout.
"""

from __future__ import annotations

import numpy as np

_N8 = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def _build_max_tree(flat, height, width):
    """Return (parent, order) for the max-tree of a raveled image.

    ``order`` lists pixel indices sorted ascending by (value, index); after
    canonicalization every parent precedes its children in that order.
    """
    n = height * width
    order = np.argsort(flat, kind="stable")
    parent = [0] * n
    zpar = [0] * n
    visited = bytearray(n)
    values = flat.tolist()
    order_list = order.tolist()

    def find_root(i):
        root = i
        while zpar[root] != root:
            root = zpar[root]
        while zpar[i] != root:
            zpar[i], i = root, zpar[i]
        return root

    for p in reversed(order_list):
        parent[p] = p
        zpar[p] = p
        visited[p] = 1
        r, c = divmod(p, width)
        for dr, dc in _N8:
            rr = r + dr
            cc = c + dc
            if 0 <= rr < height and 0 <= cc < width:
                q = rr * width + cc
                if visited[q]:
                    root = find_root(q)
                    if root != p:
                        parent[root] = p
                        zpar[root] = p

    # Point every pixel of a plateau at the single canonical node.
    for p in order_list:
        q = parent[p]
        if values[parent[q]] == values[q]:
            parent[p] = parent[q]
    return parent, order_list


def _subtree_areas(parent, order):
    area = [1] * len(parent)
    for p in reversed(order):
        q = parent[p]
        if q != p:
            area[q] += area[p]
    return area


def _direct_filter(flat, parent, order, area, threshold):
    values = flat.tolist()
    out = [0.0] * len(parent)
    root = order[0]
    out[root] = values[root]
    for p in order[1:]:
        q = parent[p]
        if values[p] == values[q]:
            out[p] = out[q]
        elif area[p] >= threshold:
            out[p] = values[p]
        else:
            out[p] = out[q]
    return out


def area_opening(image: np.ndarray, area_threshold: int) -> np.ndarray:
    """Flatten bright 8-connected structures covering fewer than
    ``area_threshold`` pixels onto the surrounding gray level."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"expected 2-d image, got shape {img.shape}")
    if area_threshold < 1:
        raise ValueError(f"area threshold must be >= 1, got {area_threshold}")
    height, width = img.shape
    flat = img.ravel()
    parent, order = _build_max_tree(flat, height, width)
    area = _subtree_areas(parent, order)
    out = _direct_filter(flat, parent, order, area, area_threshold)
    return np.asarray(out, dtype=np.float64).reshape(height, width)


def area_closing(image: np.ndarray, area_threshold: int) -> np.ndarray:
    """Dual of :func:`area_opening`: fills small dark structures."""
    return -area_opening(-np.asarray(image, dtype=np.float64), area_threshold)
