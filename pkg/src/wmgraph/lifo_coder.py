"""LIFO queue without repetition: load path, height path, tree, and pinches.

Each client j in 1..j_max arrives once, at an exponential time E_j with
mean sigma_1/w_j, and requests w_j units of service.  Service is LIFO
with preemption: a newcomer interrupts the client in service; a client
departs when the load returns to its pre-arrival level.  The load path
Y_t = -t + sum w_j 1{E_j <= t} and the stack-depth (height) path code a
forest; surplus "pinch" edges drawn from a Poisson field under the
reflected load profile complete the graph, whose law matches the direct
edge-coin sampler.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .direct_graph import AssembledGraph
from .paths import CadlagStepPath, StepFunction, height_of_path
from .weights import WeightSeq


@dataclass(frozen=True)
class LifoTrace:
    """Full record of one LIFO simulation.

    Client ids are 1-based and refer to positions in the weight vector.
    ``parent[j] == 0`` means client j was served by an idle server (a tree
    root).  ``pre_level[j]`` is the load just before j arrived; the busy
    period containing j ends when the load next returns to that level.
    """

    weights: WeightSeq
    arrival: np.ndarray          # E_j per client id (index 0 unused)
    departure: np.ndarray
    pre_level: np.ndarray
    parent: np.ndarray           # parent client id, 0 for roots
    service_intervals: tuple     # per client: tuple of (start, end)
    Y: CadlagStepPath
    H: StepFunction
    busy_periods: tuple          # (start, work, member ids) per busy period
    arrival_order: np.ndarray    # client ids sorted by arrival time

    def infimum(self, t):
        return self.Y.running_inf(t)

    def served_at(self, t: float) -> int:
        """Client in service at time t (cadlag), 0 if the server is idle."""
        order = self.arrival_order
        idx = np.searchsorted(self.arrival[order], t, side="right")
        for j in order[:idx][::-1]:
            if self.departure[j] > t:
                # deepest not-yet-departed client with arrival <= t is on top
                return int(j)
        return 0

    def stack_at(self, t: float) -> list:
        """Clients in queue at time t, bottom (oldest) first."""
        order = self.arrival_order
        idx = np.searchsorted(self.arrival[order], t, side="right")
        return [int(j) for j in order[:idx] if self.departure[j] > t]

    def write_csv(self, path):
        events = []
        for j in self.arrival_order:
            events.append((self.arrival[j], "arrival", int(j)))
            events.append((self.departure[j], "departure", int(j)))
        events.sort()
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["time", "event", "client", "Y", "H"])
            for t, kind, j in events:
                wr.writerow([repr(t), kind, j, repr(self.Y.value(t)),
                             int(self.H(t))])


@dataclass(frozen=True)
class PinchSetup:
    """Surplus-edge sample: points (t_p, y_p) under the reflected load with
    resolved start times s_p and endpoint clients (u at s_p, v at t_p)."""

    t: np.ndarray
    y: np.ndarray
    s: np.ndarray
    u: np.ndarray
    v: np.ndarray
    self_loop: np.ndarray    # bool: u == v
    boundary_tie: np.ndarray  # bool: y_p hit a load-band boundary exactly

    @property
    def size(self) -> int:
        return int(self.t.size)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t_p", "y_p", "s_p", "u", "v", "flag"])
            for i in range(self.size):
                flag = "self_loop" if self.self_loop[i] else (
                    "boundary_tie" if self.boundary_tie[i] else "")
                wr.writerow([repr(float(self.t[i])), repr(float(self.y[i])),
                             repr(float(self.s[i])), int(self.u[i]),
                             int(self.v[i]), flag])


def _replay(arrivals):
    """Event-driven LIFO stack replay.

    ``arrivals``: list of (time, client_id, weight), time-sorted.  Returns
    (departure, pre_level, parent, service_intervals, H breakpoints,
    busy_periods) keyed by client id.
    """
    departure, pre_level, parent = {}, {}, {}
    service: dict = {cid: [] for _, cid, _ in arrivals}
    h_times, h_values = [0.0], [0]
    stack = []  # (client, pre-arrival level)
    cur_t, cur_v = 0.0, 0.0
    busy = []
    cur_busy = None  # [start, work, members]
    serving_since = None

    def depart_until(limit):
        nonlocal cur_t, cur_v, serving_since, cur_busy
        while stack and cur_v - (limit - cur_t) <= stack[-1][1]:
            cid, p = stack.pop()
            dep = cur_t + (cur_v - p)
            departure[cid] = dep
            service[cid].append((serving_since, dep))
            serving_since = dep
            cur_t, cur_v = dep, p
            h_times.append(dep)
            h_values.append(len(stack))
            if not stack:
                serving_since = None
                busy.append((cur_busy[0], math.fsum(cur_busy[1]),
                             tuple(cur_busy[2])))
                cur_busy = None

    for t, cid, wt in arrivals:
        depart_until(t)
        pre = cur_v - (t - cur_t)
        if stack:
            parent[cid] = stack[-1][0]
            service[stack[-1][0]].append((serving_since, t))
            cur_busy[1].append(wt)
            cur_busy[2].append(cid)
        else:
            parent[cid] = 0
            cur_busy = [t, [wt], [cid]]
        pre_level[cid] = pre
        stack.append((cid, pre))
        serving_since = t
        cur_t, cur_v = t, pre + wt
        h_times.append(t)
        h_values.append(len(stack))
    depart_until(math.inf)
    return departure, pre_level, parent, service, (h_times, h_values), busy


def _step_from_events(h_times, h_values) -> StepFunction:
    times = np.asarray(h_times)
    values = np.asarray(h_values, dtype=float)
    keep = np.concatenate((np.diff(times) > 0, [True]))
    return StepFunction(times[keep], values[keep])


def simulate_lifo(w: WeightSeq, rng_seed=0,
                  forced_arrivals=None) -> LifoTrace:
    """Simulate the queue.  ``forced_arrivals`` (test hook) fixes the vector
    of arrival times E_j instead of drawing exponentials."""
    n = w.j_max
    s1 = w.sigma(1.0)
    if forced_arrivals is None:
        rng = np.random.default_rng(rng_seed)
        E = rng.exponential(s1 / w.w)
    else:
        E = np.asarray(forced_arrivals, dtype=float)
        if E.shape != (n,):
            raise ValueError("forced_arrivals must give one time per client")
    order = np.argsort(E, kind="stable") + 1
    arrivals = [(float(E[j - 1]), int(j), float(w.w[j - 1])) for j in order]
    departure, pre_level, parent, service, h_ev, busy = _replay(arrivals)

    arr = np.zeros(n + 1)
    dep = np.zeros(n + 1)
    pre = np.zeros(n + 1)
    par = np.zeros(n + 1, dtype=np.int64)
    arr[1:] = E
    for j in range(1, n + 1):
        dep[j] = departure[j]
        pre[j] = pre_level[j]
        par[j] = parent[j]
    jump_t = np.asarray([a[0] for a in arrivals])
    jump_x = np.asarray([a[2] for a in arrivals])
    horizon = max(dep.max(), float(E.max()))
    Y = CadlagStepPath(jump_t, jump_x, horizon)
    H = _step_from_events(*h_ev)
    return LifoTrace(
        weights=w, arrival=arr, departure=dep, pre_level=pre, parent=par,
        service_intervals=tuple(tuple(service[j]) for j in range(1, n + 1)),
        Y=Y, H=H, busy_periods=tuple(busy), arrival_order=order)


def resolve_pinch(trace: LifoTrace, t_p: float, y_p: float):
    """Resolve one pinch point (t_p, y_p) with 0 < y_p < (Y-J)(t_p).

    The start time s_p = inf{s <= t_p : inf_{[s,t_p]}(Y-J) > y_p} is the
    arrival time of the deepest queued ancestor whose load band contains
    y_p: scanning the stack at t_p bottom-up, the infimum of Y over
    [arrival_k, t_p] equals the pre-arrival level of the next stack entry
    (or Y(t_p) at the top).  Returns (s_p, u, v, self_loop, boundary_tie).
    """
    stack = trace.stack_at(t_p)
    if not stack:
        raise ValueError("pinch time falls outside every busy period")
    j_exc = trace.pre_level[stack[0]]  # excursion infimum level
    rel = [trace.pre_level[j] - j_exc for j in stack]  # 0 = bottom band floor
    if not 0.0 < y_p < trace.Y.value(t_p) - j_exc:
        raise ValueError("pinch level outside the reflected load at t_p")
    k = 0
    tie = False
    for i, r in enumerate(rel):
        if r <= y_p:
            k = i
            if r == y_p and i > 0:
                tie = True  # boundary hit: assigned to the deeper ancestor
        else:
            break
    u = stack[k]
    v = trace.served_at(t_p)
    s_p = float(trace.arrival[u])
    return s_p, int(u), int(v), bool(u == v), tie


def sample_pinches(trace: LifoTrace, rng_seed=0,
                   forced_points=None) -> PinchSetup:
    """Poisson surplus sample under the reflected load profile.

    The number of points is Poisson with mean area/sigma_1 where area is
    the integral of Y-J; each point is uniform under the profile.
    ``forced_points`` (test hook): iterable of (t_p, y_p) used verbatim.
    """
    w = trace.weights
    s1 = w.sigma(1.0)
    if forced_points is not None:
        pts = [(float(t), float(y)) for t, y in forced_points]
    else:
        rng = np.random.default_rng(rng_seed)
        segs = _profile_segments(trace)
        areas = np.asarray([a for *_, a in segs])
        total = float(areas.sum())
        count = rng.poisson(total / s1)
        pts = []
        if count:
            which = rng.choice(len(segs), size=count, p=areas / total)
            for i in which:
                t0, r0, live, _ = segs[i]
                # triangular slice: density of u on [0, live] prop. to r0-u
                area_i = r0 * live - live * live / 2.0
                uu = rng.random() * area_i
                u = r0 - math.sqrt(r0 * r0 - 2.0 * uu)
                y = rng.random() * (r0 - u)
                pts.append((t0 + u, y))
        pts.sort()
    res = [resolve_pinch(trace, t, y) for t, y in pts]
    return PinchSetup(
        t=np.asarray([t for t, _ in pts]),
        y=np.asarray([y for _, y in pts]),
        s=np.asarray([r[0] for r in res]),
        u=np.asarray([r[1] for r in res], dtype=np.int64),
        v=np.asarray([r[2] for r in res], dtype=np.int64),
        self_loop=np.asarray([r[3] for r in res], dtype=bool),
        boundary_tie=np.asarray([r[4] for r in res], dtype=bool))


def _profile_segments(trace: LifoTrace):
    """Linear segments of the reflected load R = Y - J.

    Between consecutive arrivals R decreases at unit rate from its
    post-jump value until it hits 0 (end of a busy period).  Returns
    (start_time, start_level, live_length, area) per segment with area
    the integral of R over the segment.
    """
    Y = trace.Y
    segs = []
    r = 0.0
    prev_t = 0.0
    for t, x in zip(Y.times, Y.sizes):
        gap = t - prev_t
        if r > 0:
            live = min(r, gap)
            segs.append((prev_t, r, live, r * live - live * live / 2.0))
        r = max(r - gap, 0.0) + x
        prev_t = t
    if r > 0:
        segs.append((prev_t, r, r, r * r / 2.0))
    return segs


def assemble_graph(trace: LifoTrace, pinches: PinchSetup | None = None) -> AssembledGraph:
    """Tree edges (parents, root edges dropped) unioned with pinch edges;
    self-loops and duplicates collapse with counts reported."""
    edges = set()
    n = trace.weights.j_max
    for j in range(1, n + 1):
        p = int(trace.parent[j])
        if p != 0:
            edges.add((min(j, p), max(j, p)))
    loops = 0
    dups = 0
    if pinches is not None:
        for i in range(pinches.size):
            u, v = int(pinches.u[i]), int(pinches.v[i])
            if u == v:
                loops += 1
                continue
            e = (min(u, v), max(u, v))
            if e in edges:
                dups += 1
            else:
                edges.add(e)
    return AssembledGraph(n=n, weights=trace.weights.w, edges=frozenset(edges),
                          provenance="lifo", n_self_loops_dropped=loops,
                          n_duplicates_dropped=dups)


__all__ = [
    "LifoTrace", "PinchSetup", "CadlagStepPath", "StepFunction",
    "simulate_lifo", "height_of_path", "sample_pinches", "resolve_pinch",
    "assemble_graph",
]
