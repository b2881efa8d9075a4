"""Metric spaces coded by excursion functions.

A nonnegative coding function h on [0, zeta) defines the tree
pseudometric d_h(s,t) = h(s) + h(t) - 2*min over [s^t, s v t] of h.
Pinch pairs (s_i, t_i) add shortcuts of length min(eps, d_h(s_i, t_i)),
giving the pinched pseudometric (shortest paths through the shortcuts).
The coding-continuity bound dominates the Gromov-Hausdorff-Prokhorov
distance between two such spaces by uniform distance and modulus terms.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .paths import StepFunction, modulus_of_continuity, uniform_distance


@dataclass(frozen=True)
class CodedSpace:
    h: StepFunction
    pinches: tuple            # ((s_i, t_i), ...)
    eps: float
    samples: np.ndarray       # sample times
    weights: np.ndarray       # mass per sample

    def __init__(self, h, pinches=(), eps=0.0, samples=(), weights=None):
        if eps < 0:
            raise ValueError("eps must be nonnegative")
        samples = np.asarray(samples, dtype=float)
        if weights is None:
            weights = np.ones_like(samples)
        zeta = float(h.times[-1])
        for s, t in pinches:
            if not (0 <= s <= t <= zeta):
                raise ValueError("pinch outside the coding domain")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "pinches", tuple((float(s), float(t))
                                                  for s, t in pinches))
        object.__setattr__(self, "eps", float(eps))
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "weights", np.asarray(weights, dtype=float))

    @property
    def zeta(self) -> float:
        return float(self.h.times[-1])


def tree_distance(h: StepFunction, s: float, t: float) -> float:
    """d_h(s, t) = h(s) + h(t) - 2*min of h over [min(s,t), max(s,t)]."""
    return float(h(s) + h(t) - 2.0 * h.min_on(s, t))


def _pairwise_tree(h: StepFunction, pts: np.ndarray) -> np.ndarray:
    n = pts.size
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = tree_distance(h, float(pts[i]), float(pts[j]))
    return d


def pinched_matrix(space: CodedSpace) -> np.ndarray:
    """Pinched distances between sample points.

    Shortest paths on the complete auxiliary graph over samples plus pinch
    endpoints, with tree-distance weights and shortcut edges of length
    min(eps, d_h(s_i, t_i)), computed by min-plus closure."""
    m = space.samples.size
    endpoints = [x for st in space.pinches for x in st]
    pts = np.concatenate((space.samples, np.asarray(endpoints, dtype=float)))
    d = _pairwise_tree(space.h, pts)
    for i, (s, t) in enumerate(space.pinches):
        a, b = m + 2 * i, m + 2 * i + 1
        cut = min(space.eps, tree_distance(space.h, s, t))
        d[a, b] = d[b, a] = min(d[a, b], cut)
    if space.pinches:
        # min-plus closure; a dense csgraph call would silently drop the
        # legitimate zero-length edges (identified points, eps = 0 cuts)
        full = d
        for k in range(d.shape[0]):
            full = np.minimum(full, full[:, k, None] + full[None, k, :])
    else:
        full = d
    return full[:m, :m]


def ghp_upper_bound(h: StepFunction, h2: StepFunction, pinches, pinches2,
                    eps: float, eps2: float, delta: float) -> float:
    """Coding bound on the GHP distance between two pinched spaces:
    6(p+1)(sup|h - h'| + modulus_delta(h)) + 3p*max(eps, eps') + |zeta - zeta'|.

    Requires equal pinch counts and index-matched pinch times within delta
    (no bound is defined otherwise)."""
    if len(pinches) != len(pinches2):
        raise ValueError("pinch counts differ; the bound is undefined")
    for (s, t), (s2, t2) in zip(pinches, pinches2):
        if abs(s - s2) > delta or abs(t - t2) > delta:
            raise ValueError("pinch times differ by more than delta")
    p = len(pinches)
    zeta, zeta2 = float(h.times[-1]), float(h2.times[-1])
    sup = uniform_distance(h, h2)
    omega = modulus_of_continuity(h, delta)
    return (6.0 * (p + 1) * (sup + omega) + 3.0 * p * max(eps, eps2)
            + abs(zeta - zeta2))


def write_matrix_csv(space: CodedSpace, matrix: np.ndarray, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t"] + [repr(float(s)) for s in space.samples])
        for i, s in enumerate(space.samples):
            wr.writerow([repr(float(s))] + [repr(float(x)) for x in matrix[i]])
