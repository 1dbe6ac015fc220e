# src/estimation/isotonic.py
"""
Greatest convex minorants of cusum diagrams and their left-continuous slopes.

`gcm` + `left_slope` is the explicit construction; `cusum_slopes` is the
production path (weighted PAVA from scikit-learn on the diagram increments),
and `pava_oracle` is an independent pure-Python PAVA used to cross-check both.
"""
import logging
from typing import List, Sequence

import numpy as np
from sklearn.isotonic import isotonic_regression

from .schema import ConvexMinorant, CusumDiagram

logger = logging.getLogger(__name__)


def gcm(diagram: CusumDiagram) -> ConvexMinorant:
    """Lower convex hull by a monotone-chain scan; collinear points are dropped."""
    xs, ys = diagram.x, diagram.y
    hull: List[int] = [0]
    for k in range(1, xs.shape[0]):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (xs[a] - xs[o]) * (ys[k] - ys[o]) - (ys[a] - ys[o]) * (xs[k] - xs[o])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(k)

    vx, vy = xs[hull], ys[hull]
    return ConvexMinorant(vertices_x=vx, vertices_y=vy, slopes=np.diff(vy) / np.diff(vx))


def left_slope(minorant: ConvexMinorant, x):
    """Slope of the segment (v_{k-1}, v_k] containing x; left-continuous at vertices."""
    x = np.asarray(x, dtype=float)
    vx = minorant.vertices_x
    if np.any(x <= vx[0]) or np.any(x > vx[-1]):
        raise ValueError(f"slope queries must lie in ({vx[0]}, {vx[-1]}]")
    idx = np.searchsorted(vx, x, side="left")
    return minorant.slopes[idx - 1]


def pava_oracle(weights: Sequence[float], values: Sequence[float]) -> np.ndarray:
    """Weighted isotonic (nondecreasing) regression by pool-adjacent-violators."""
    weights = [float(w) for w in weights]
    values = [float(v) for v in values]
    if len(weights) != len(values):
        raise ValueError("weights and values must have the same length")
    if any(w <= 0 for w in weights):
        raise ValueError("PAVA weights must be positive")

    # blocks: [mean, total weight, number of points]
    blocks: List[List[float]] = []
    for w, v in zip(weights, values):
        blocks.append([v, w, 1])
        while len(blocks) >= 2 and blocks[-2][0] > blocks[-1][0]:
            v2, w2, c2 = blocks.pop()
            v1, w1, c1 = blocks.pop()
            total = w1 + w2
            blocks.append([(v1 * w1 + v2 * w2) / total, total, c1 + c2])

    out = []
    for mean, _, count in blocks:
        out.extend([mean] * int(count))
    return np.array(out)


def cusum_slopes(dx, dy) -> np.ndarray:
    """
    Left slopes of the GCM at x_1..x_n of the diagram with increments (dx, dy),
    i.e. weighted isotonic regression of dy/dx with weights dx.
    """
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    if np.any(dx <= 0):
        raise ValueError("cusum x-increments must be positive")
    return isotonic_regression(dy / dx, sample_weight=dx, increasing=True)


def diagram_slopes(diagram: CusumDiagram) -> np.ndarray:
    return cusum_slopes(np.diff(diagram.x), np.diff(diagram.y))
