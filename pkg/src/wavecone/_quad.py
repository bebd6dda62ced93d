"""Composite Gauss-Legendre helpers."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panels(edges, order: int = 32):
    """Nodes and weights of composite Gauss-Legendre on consecutive panels.

    ``edges`` is an increasing 1-D sequence of panel endpoints.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def split_interval(a: float, b: float, breakpoints=(), max_len: float = 0.5):
    """Panel edges covering [a, b], honouring breakpoints and a maximal panel length."""
    pts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    edges = [a]
    for lo, hi in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil((hi - lo) / max_len)))
        edges.extend(np.linspace(lo, hi, k + 1)[1:].tolist())
    return np.asarray(edges)


def graded_edges(a: float, b: float, levels: int = 12, ratio: float = 0.5):
    """Geometric panels clustered towards ``a`` (used near weak endpoint singularities)."""
    if b <= a:
        return np.asarray([a, b])
    L = b - a
    inner = [a + L * ratio**k for k in range(levels, 0, -1)]
    return np.asarray([a] + inner + [b])
