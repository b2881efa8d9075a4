"""Direct sampler of the weight-multiplicative graph by independent edge coins.

Vertices 1..j carry weights w_1 >= ... >= w_j; the unordered pair {i, k}
is an edge independently with probability h(w_i*w_k/sigma_1), where h is
one of exp: 1-e^{-x}, cap: 1 and x, ratio: x/(1+x).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .weights import WeightSeq

# Above this vertex count the sampler switches from pair enumeration to
# Poissonized proposals (O(n^2) coins dominate runtime otherwise).
ENUMERATION_LIMIT = 3000

# Proposal boosting for the rejection sampler: intensity multiplier c must
# satisfy 1 - e^{-c x} >= h(x) on [0, X_STAR]; pairs with x >= X_STAR are
# enumerated exactly (they require two large weights, so there are few).
X_STAR = 0.9
BOOST = -math.log(0.1) / X_STAR  # 1 - e^{-BOOST*X_STAR} = X_STAR exactly


def edge_probability(x, edge_fn: str):
    x = np.asarray(x, dtype=float)
    if edge_fn == "exp":
        out = -np.expm1(-x)
    elif edge_fn == "cap":
        out = np.minimum(1.0, x)
    elif edge_fn == "ratio":
        out = x / (1.0 + x)
    else:
        raise ValueError(f"unknown edge function {edge_fn!r}")
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class AssembledGraph:
    """Simple graph on vertices 1..n with per-vertex weights."""

    n: int
    weights: np.ndarray
    edges: frozenset  # of (u, v) tuples with u < v
    provenance: str   # "direct" or "lifo"
    n_self_loops_dropped: int = 0
    n_duplicates_dropped: int = 0

    def __post_init__(self):
        for u, v in self.edges:
            if not (1 <= u < v <= self.n):
                raise ValueError(f"invalid edge ({u}, {v})")

    def adjacency(self) -> list:
        adj = [[] for _ in range(self.n + 1)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def write_edge_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["u", "v"])
            for u, v in sorted(self.edges):
                wr.writerow([u, v])


@dataclass(frozen=True)
class ComponentView:
    """One connected component; root is the first-explored vertex."""

    vertices: tuple
    root: int
    mass: float
    count: int
    edges: tuple

    def __post_init__(self):
        if self.root != min(self.vertices):
            raise ValueError("root must be the first-explored (smallest) vertex")


def sample_direct(w: WeightSeq, edge_fn: str = "exp", rng_seed=0,
                  force_mode: str | None = None) -> AssembledGraph:
    """Draw one graph.  ``force_mode`` in {"enumerate", "poisson"} overrides
    the size-based choice (used to cross-validate the two samplers)."""
    rng = np.random.default_rng(rng_seed)
    n = w.j_max
    s1 = w.sigma(1.0)
    mode = force_mode or ("enumerate" if n <= ENUMERATION_LIMIT else "poisson")
    if mode == "enumerate":
        iu, iv = np.triu_indices(n, k=1)
        x = w.w[iu] * w.w[iv] / s1
        keep = rng.random(iu.size) < edge_probability(x, edge_fn)
        edges = frozenset(zip((iu[keep] + 1).tolist(), (iv[keep] + 1).tolist()))
    elif mode == "poisson":
        edges = _sample_poissonized(w, edge_fn, rng)
    else:
        raise ValueError(f"unknown mode {force_mode!r}")
    return AssembledGraph(n=n, weights=w.w, edges=edges,
                          provenance=f"direct-{'exact' if mode == 'enumerate' else 'poisson'}")


def _sample_poissonized(w: WeightSeq, edge_fn: str, rng) -> frozenset:
    """Poisson proposal sampler.

    Multiedge proposals form a Poisson field with per-pair mean
    BOOST*w_i*w_k/sigma_1; a proposed pair with x = w_i*w_k/sigma_1 < X_STAR
    is accepted with probability h(x)/(1 - e^{-BOOST*x}), which leaves the
    pair present with probability exactly h(x).  Pairs with x >= X_STAR
    (both weights large) are enumerated and given exact coins.
    """
    n = w.j_max
    s1 = w.sigma(1.0)
    # exact region: w_i*w_k >= X_STAR*s1 needs w_k >= X_STAR*s1/w_1
    big = int(np.searchsorted(-w.w, -X_STAR * s1 / w.w[0], side="right"))
    exact_pairs = set()
    edges = set()
    if big >= 2:
        iu, iv = np.triu_indices(big, k=1)
        x = w.w[iu] * w.w[iv] / s1
        hot = x >= X_STAR
        exact_pairs = set(zip((iu[hot] + 1).tolist(), (iv[hot] + 1).tolist()))
        keep = hot & (rng.random(iu.size) < edge_probability(x, edge_fn))
        edges.update(zip((iu[keep] + 1).tolist(), (iv[keep] + 1).tolist()))
    total = rng.poisson(BOOST * s1 / 2.0)
    p = w.w / s1
    a = rng.choice(n, size=total, p=p) + 1
    b = rng.choice(n, size=total, p=p) + 1
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    proposed = set(zip(lo[lo < hi].tolist(), hi[lo < hi].tolist()))
    for u, v in proposed:
        if (u, v) in exact_pairs:
            continue
        x = w.w[u - 1] * w.w[v - 1] / s1
        accept = edge_probability(x, edge_fn) / -math.expm1(-BOOST * x)
        if edge_fn == "exp" and BOOST == 1.0:
            accept = 1.0
        if rng.random() < accept:
            edges.add((u, v))
    return frozenset(edges)


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n + 1))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller id as representative: exploration order
            if ra > rb:
                ra, rb = rb, ra
            self.parent[rb] = ra


def connected_components(g: AssembledGraph, order_by: str = "mass") -> list:
    """Components sorted nonincreasing by mass or count; ties broken by the
    smallest first-explored vertex id."""
    if order_by not in ("mass", "count"):
        raise ValueError("order_by must be 'mass' or 'count'")
    uf = _UnionFind(g.n)
    for u, v in g.edges:
        uf.union(u, v)
    members: dict = {}
    for v in range(1, g.n + 1):
        members.setdefault(uf.find(v), []).append(v)
    local_edges: dict = {}
    for u, v in sorted(g.edges):
        local_edges.setdefault(uf.find(u), []).append((u, v))
    views = []
    for root, verts in members.items():
        verts = sorted(verts)
        mass = math.fsum(float(g.weights[v - 1]) for v in verts)
        views.append(ComponentView(
            vertices=tuple(verts), root=verts[0], mass=mass,
            count=len(verts), edges=tuple(local_edges.get(root, ()))))
    key = (lambda c: (-c.mass, c.root)) if order_by == "mass" \
        else (lambda c: (-c.count, c.root))
    return sorted(views, key=key)


def graph_distances(c: ComponentView) -> np.ndarray:
    """All-pairs hop counts by per-source BFS; rows/columns follow c.vertices."""
    index = {v: i for i, v in enumerate(c.vertices)}
    n = len(c.vertices)
    adj = [[] for _ in range(n)]
    for u, v in c.edges:
        adj[index[u]].append(index[v])
        adj[index[v]].append(index[u])
    dist = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        queue = [s]
        while queue:
            nxt = []
            for x in queue:
                for y in adj[x]:
                    if dist[s, y] < 0:
                        dist[s, y] = dist[s, x] + 1
                        nxt.append(y)
            queue = nxt
    if np.any(dist < 0):
        raise ValueError("component is not connected")
    return dist


def write_component_csv(views: list, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["rank", "mass", "count", "root"])
        for k, c in enumerate(views, start=1):
            wr.writerow([k, repr(c.mass), c.count, c.root])
