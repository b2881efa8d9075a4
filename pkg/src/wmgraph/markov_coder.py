"""Markovian LIFO queue, its forest coupling, and the blue/red split.

Clients arrive at unit-rate Poisson times with i.i.d. types drawn from
nu_w(j) = w_j/sigma_1 and request w_type units of service under LIFO
preemption.  The load path X and height path H code a forest of i.i.d.
trees whose offspring law is the Poisson mixture mu_w.  Colouring the
clients blue (first of their type, served in blue context) or red embeds
the queue without repetition: time-changing X by the blue clock
reproduces the load path Y of the lifo_coder module in law and, on a
common realization, pathwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .paths import CadlagStepPath, StepFunction, height_of_path
from .weights import WeightSeq


@dataclass(frozen=True)
class MarkovTrace:
    """One Markov-queue realization; clients are arrival indices 1..K."""

    weights: WeightSeq
    tau: np.ndarray           # arrival times, index 0 unused
    types: np.ndarray         # type id per arrival
    departure: np.ndarray     # +inf if still queued at the horizon
    pre_level: np.ndarray
    parent: np.ndarray        # parent arrival index, 0 for tree roots
    service_intervals: tuple
    X: CadlagStepPath
    H: StepFunction
    horizon: float
    empty_epochs: np.ndarray  # times at which a departure left the queue empty
    # filled by color_blue_red:
    color: np.ndarray | None = None          # "b"/"r" per arrival
    blue_side: np.ndarray | None = None      # arrivals whose jump is blue-side
    red_blocks: tuple | None = None          # (start, end) per red block
    blue_intervals: tuple | None = None
    A: StepFunction | None = None            # repeat-load A^w in the blue clock
    Y_emb: CadlagStepPath | None = None      # X read through the blue clock
    H_emb: StepFunction | None = None
    t_star_surrogate: float | None = None

    @property
    def n_arrivals(self) -> int:
        return int(self.tau.size - 1)

    def events(self) -> np.ndarray:
        dep = self.departure[1:]
        return np.unique(np.concatenate(
            ([0.0], self.tau[1:], dep[np.isfinite(dep)], [self.horizon])))


def simulate_markov(w: WeightSeq, horizon: float = math.inf, rng_seed=0,
                    stop_at_empty: int | None = None,
                    forced_arrivals=None) -> MarkovTrace:
    """Simulate until ``horizon`` or until ``stop_at_empty`` empty-queue
    epochs, whichever comes first (at least one must be finite).

    ``forced_arrivals`` (test hook): list of (time, type) pairs replacing
    the Poisson/type draws.
    """
    if not math.isfinite(horizon) and stop_at_empty is None \
            and forced_arrivals is None:
        raise ValueError("need a finite horizon or an empty-epoch target")
    s1 = w.sigma(1.0)
    nu = w.w / s1
    rng = np.random.default_rng(rng_seed)

    if forced_arrivals is not None:
        forced = [(float(t), int(j)) for t, j in forced_arrivals]
        if horizon is math.inf:
            # every forced client departs by last arrival + total work
            horizon = (max(t for t, _ in forced)
                       + math.fsum(float(w.w[j - 1]) for _, j in forced)
                       if forced else 1.0)

    tau_list, type_list = [], []
    departure, pre_level, parent = {}, {}, {}
    service: dict = {}
    h_times, h_values = [0.0], [0]
    stack = []
    cur_t, cur_v = 0.0, 0.0
    serving_since = None
    empty_epochs = []
    n_empty_target = stop_at_empty if stop_at_empty is not None else math.inf

    def depart_until(limit):
        nonlocal cur_t, cur_v, serving_since
        while stack and cur_v - (limit - cur_t) <= stack[-1][1]:
            cid, p = stack.pop()
            dep = cur_t + (cur_v - p)
            departure[cid] = dep
            service[cid].append((serving_since, dep))
            serving_since = dep if stack else None
            cur_t, cur_v = dep, p
            h_times.append(dep)
            h_values.append(len(stack))
            if not stack:
                empty_epochs.append(dep)
                if len(empty_epochs) >= n_empty_target:
                    return True
        return False

    next_arrival = 0.0
    k = 0
    while True:
        if forced_arrivals is not None:
            if k >= len(forced):
                break
            t, j = forced[k]
        else:
            next_arrival += rng.exponential(1.0)
            t, j = next_arrival, int(rng.choice(w.j_max, p=nu)) + 1
        if t > horizon:
            break
        if depart_until(t):
            break
        k += 1
        tau_list.append(t)
        type_list.append(j)
        pre = cur_v - (t - cur_t)
        if stack:
            parent[k] = stack[-1][0]
            service[stack[-1][0]].append((serving_since, t))
        else:
            parent[k] = 0
        pre_level[k] = pre
        service[k] = []
        stack.append((k, pre))
        serving_since = t
        cur_t, cur_v = t, pre + w.w[j - 1]
        h_times.append(t)
        h_values.append(len(stack))
    if len(empty_epochs) < n_empty_target:
        done = depart_until(horizon)
        if not done and math.isfinite(horizon):
            # truncate open services at the horizon
            if stack:
                service[stack[-1][0]].append((serving_since, horizon))
            for cid, _ in stack:
                departure[cid] = math.inf
    end = empty_epochs[-1] if len(empty_epochs) >= n_empty_target else horizon
    if not math.isfinite(end):
        end = max([cur_t] + tau_list)

    n = k
    tau = np.zeros(n + 1)
    types = np.zeros(n + 1, dtype=np.int64)
    dep = np.zeros(n + 1)
    pre = np.zeros(n + 1)
    par = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        tau[i] = tau_list[i - 1]
        types[i] = type_list[i - 1]
        dep[i] = departure.get(i, math.inf)
        pre[i] = pre_level[i]
        par[i] = parent[i]
    X = CadlagStepPath(tau[1:], w.w[types[1:] - 1], float(end))
    keep = np.asarray(h_times) <= end
    H = _collapse_steps(np.asarray(h_times)[keep],
                        np.asarray(h_values, dtype=float)[keep])
    return MarkovTrace(
        weights=w, tau=tau, types=types, departure=dep, pre_level=pre,
        parent=par,
        service_intervals=tuple(tuple(service[i]) for i in range(1, n + 1)),
        X=X, H=H, horizon=float(end), empty_epochs=np.asarray(empty_epochs))


def _collapse_steps(times, values) -> StepFunction:
    keep = np.concatenate((np.diff(times) > 0, [True]))
    return StepFunction(times[keep], values[keep])


def mu_w_pmf(w: WeightSeq, k) -> float | np.ndarray:
    """Offspring pmf of the coupled forest: Poisson mixed over types,
    mu(k) = sum_j w_j^{k+1} e^{-w_j} / (sigma_1 * k!)."""
    k = np.asarray(k)
    s1 = w.sigma(1.0)
    lw = np.log(w.w)
    out = np.zeros(k.shape if k.ndim else (1,), dtype=float)
    kk = np.atleast_1d(k)
    for i, kv in enumerate(kk.ravel()):
        terms = (kv + 1) * lw - w.w - math.lgamma(kv + 1)
        out.ravel()[i] = math.fsum(np.exp(terms)) / s1
    return float(out[0]) if k.ndim == 0 else out.reshape(k.shape)


def sample_offspring_counts(w: WeightSeq, n: int, rng_seed=0) -> np.ndarray:
    """n i.i.d. offspring counts of the coupled forest, drawn by the
    two-stage recipe: type from nu_w, then Poisson(w_type) children."""
    rng = np.random.default_rng(rng_seed)
    s1 = w.sigma(1.0)
    types = rng.choice(w.j_max, size=n, p=w.w / s1)
    return rng.poisson(w.w[types])


def gw_generation_sizes(w: WeightSeq, z0: int, generations: int,
                        rng_seed=0) -> np.ndarray:
    """Population sizes Z_0..Z_g of the coupled branching process.

    Each individual draws a type from nu_w and then Poisson(w_type)
    children, so conditionally on the types the next generation is
    Poisson(sum of the drawn weights)."""
    rng = np.random.default_rng(rng_seed)
    s1 = w.sigma(1.0)
    nu = w.w / s1
    sizes = [int(z0)]
    z = int(z0)
    for _ in range(generations):
        if z == 0:
            sizes.append(0)
            continue
        counts = rng.multinomial(z, nu)
        z = int(rng.poisson(float(np.dot(counts, w.w))))
        sizes.append(z)
    return np.asarray(sizes, dtype=np.int64)


@dataclass(frozen=True)
class GwForestStats:
    """Coding paths of the completed part of the explored forest."""

    V: np.ndarray                 # Lukasiewicz path, V[0] = 0
    Hght: np.ndarray              # integer heights per explored vertex
    contour: tuple                # per completed tree: height sequence of the edge walk
    contour_visits: tuple         # per completed tree: vertex id per walk step
    offspring_counts: np.ndarray  # per departed client, arrival order
    tree_sizes: np.ndarray
    vertex_order: np.ndarray      # arrival indices included in V/Hght


def completed_clients(trace: MarkovTrace) -> np.ndarray:
    return np.asarray([i for i in range(1, trace.n_arrivals + 1)
                       if math.isfinite(trace.departure[i])], dtype=np.int64)


def gw_forest_stats(trace: MarkovTrace) -> GwForestStats:
    """Lukasiewicz/height/contour over the completed trees of the trace.

    Arrival order is depth-first order, so V is built directly from the
    offspring counts of the clients in completed trees (trees whose root
    departed before the horizon)."""
    n = trace.n_arrivals
    children: dict = {i: [] for i in range(0, n + 1)}
    for i in range(1, n + 1):
        children[int(trace.parent[i])].append(i)
    done = set(completed_clients(trace).tolist())
    roots = [r for r in children[0] if r in done]
    offspring_all = np.asarray(
        [len(children[i]) for i in sorted(done)], dtype=np.int64)

    v = [0]
    hts = []
    order = []
    tree_sizes = []
    contours = []
    visits = []
    for r in roots:
        depth = {r: 0}
        walk = [r]
        stack = [(r, iter(children[r]))]
        size = 0
        cont = [0]
        cvis = [r]
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                if stack:
                    cont.append(depth[stack[-1][0]])
                    cvis.append(stack[-1][0])
                continue
            depth[nxt] = depth[node] + 1
            cont.append(depth[nxt])
            cvis.append(nxt)
            stack.append((nxt, iter(children[nxt])))
        # depth-first (= arrival) order within the tree
        dfs = sorted(depth, key=lambda i: i)
        for node in dfs:
            order.append(node)
            hts.append(depth[node])
            v.append(v[-1] + len(children[node]) - 1)
            size += 1
        tree_sizes.append(size)
        contours.append(np.asarray(cont, dtype=np.int64))
        visits.append(np.asarray(cvis, dtype=np.int64))
    return GwForestStats(
        V=np.asarray(v, dtype=np.int64),
        Hght=np.asarray(hts, dtype=np.int64),
        contour=tuple(contours), contour_visits=tuple(visits),
        offspring_counts=offspring_all,
        tree_sizes=np.asarray(tree_sizes, dtype=np.int64),
        vertex_order=np.asarray(order, dtype=np.int64))


def color_blue_red(trace: MarkovTrace) -> MarkovTrace:
    """Colour clients and build the blue clock.

    A client is red if its type already appeared among blue clients, or if
    the client in service at its arrival (idle counts as blue) is red;
    otherwise blue.  A red block runs from the arrival of a red client in
    blue context (a red root) to that client's departure; the red root's
    load jump is charged to the blue side.  Blue time is everything else.
    """
    n = trace.n_arrivals
    color = np.empty(n + 1, dtype="U1")
    blue_side = np.zeros(n + 1, dtype=bool)
    blue_types: set = set()
    red_blocks = []
    open_block_end = -math.inf  # real-time end of the current red block
    t_star = None
    for i in range(1, n + 1):
        t = float(trace.tau[i])
        in_red = t < open_block_end
        if not in_red:
            blue_side[i] = True
        repeat = int(trace.types[i]) in blue_types
        if in_red or repeat:
            color[i] = "r"
            if not in_red:  # red root: opens a block until its departure
                end = float(trace.departure[i])
                red_blocks.append((t, end))
                open_block_end = end
                if not math.isfinite(end) and t_star is None:
                    t_star = t
        else:
            color[i] = "b"
            blue_types.add(int(trace.types[i]))

    end = trace.horizon
    red_blocks = [(a, min(b, end)) for a, b in red_blocks if a < end]
    blue_intervals = []
    cursor = 0.0
    for a, b in red_blocks:
        if a > cursor:
            blue_intervals.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < end:
        blue_intervals.append((cursor, end))

    lam = _clock(blue_intervals)
    # A^w in the blue clock: jumps at blue-side repeat arrivals
    a_times, a_sizes = [], []
    y_times, y_sizes = [], []
    for i in range(1, n + 1):
        if not blue_side[i]:
            continue
        bt = lam(float(trace.tau[i]))
        wt = float(trace.weights.w[trace.types[i] - 1])
        if color[i] == "b":
            y_times.append(bt)
            y_sizes.append(wt)
        else:
            a_times.append(bt)
            a_sizes.append(wt)
    blue_total = lam(end)
    Y_emb = CadlagStepPath(np.asarray(y_times), np.asarray(y_sizes), blue_total)
    A = _cum_steps(a_times, a_sizes)
    theta = _clock_inverse(blue_intervals, end)
    # H read through the blue clock; its breakpoints are the blue-clock
    # images of all queue events (arrivals and finite departures)
    dep = trace.departure[1:]
    ev = np.concatenate(([0.0], trace.tau[1:], dep[np.isfinite(dep)], [end]))
    bts = np.unique(lam(ev[ev <= end]))
    bts = bts[bts <= blue_total]
    real = theta(bts)
    keepf = np.isfinite(real)
    H_emb = _collapse_steps(bts[keepf], trace.H(real[keepf]))
    return replace(trace, color=color, blue_side=blue_side,
                   red_blocks=tuple(red_blocks),
                   blue_intervals=tuple(blue_intervals), A=A,
                   Y_emb=Y_emb, H_emb=H_emb, t_star_surrogate=t_star)


def _cum_steps(times, sizes) -> StepFunction:
    order = np.argsort(times)
    t = np.concatenate(([0.0], np.asarray(times, dtype=float)[order]))
    v = np.concatenate(([0.0], np.cumsum(np.asarray(sizes, dtype=float)[order])))
    keep = np.concatenate((np.diff(t) > 0, [True]))
    return StepFunction(t[keep], v[keep])


def _clock(intervals):
    """Lambda(t) = Lebesgue measure of the interval set up to t."""
    starts = np.asarray([a for a, _ in intervals])
    ends = np.asarray([b for _, b in intervals])
    cum = np.concatenate(([0.0], np.cumsum(ends - starts)))

    def lam(t):
        t = np.asarray(t, dtype=float)
        if starts.size == 0:
            out = np.zeros_like(t)
            return float(out) if out.ndim == 0 else out
        i = np.searchsorted(starts, t, side="right")
        j = np.maximum(i - 1, 0)
        inside = np.clip(np.minimum(t, ends[j]) - starts[j], 0.0, None)
        out = cum[j] + np.where(i > 0, inside, 0.0)
        return float(out) if out.ndim == 0 else out
    return lam


def _clock_inverse(intervals, horizon=None):
    """Right inverse theta(s) = inf{t : Lambda(t) > s} of the clock.

    For s at or past the total accumulated time the infimum is empty,
    hence +inf, unless the final interval reaches the horizon, in which
    case theta(total) = horizon is the natural evaluation point."""
    starts = np.asarray([a for a, _ in intervals])
    ends = np.asarray([b for _, b in intervals])
    lens = ends - starts
    cum = np.concatenate(([0.0], np.cumsum(lens)))
    closed = (horizon is not None and len(starts) > 0
              and ends[-1] >= horizon)
    top = ends[-1] if closed else math.inf

    def theta(s):
        s = np.asarray(s, dtype=float)
        if len(lens) == 0:
            out = np.full_like(s, math.inf)
            return float(out) if out.ndim == 0 else out
        i = np.clip(np.searchsorted(cum, s, side="right") - 1, 0,
                    len(lens) - 1)
        out = starts[i] + (s - cum[i])
        out = np.where(s >= cum[-1], np.where(s > cum[-1], math.inf, top),
                       out)
        return float(out) if out.ndim == 0 else out
    return theta


@dataclass(frozen=True)
class IdentityReport:
    results: dict

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.results.values())

    def to_json(self) -> str:
        return json.dumps(self.results, indent=2)


TOL_IDENTITY = 1e-9


def verify_embedding(trace: MarkovTrace) -> IdentityReport:
    """Pathwise identity checks on a coloured trace.

    (a) the embedded load Y equals X read at the blue-clock inverse;
    (b) the embedded height equals H read the same way, with Y's height
        recomputed independently from the reconstructed path;
    (c) X splits into blue and red parts composed with their clocks;
    (d) the H-jump counter M equals 2N - H at event times;
    (e) blue clients have pairwise distinct types.
    Both sides of (a)-(c) are piecewise linear with slope -1 between event
    times, so agreement at breakpoints implies agreement everywhere.
    """
    if trace.color is None:
        trace = color_blue_red(trace)
    results = {}
    theta = _clock_inverse(trace.blue_intervals, trace.horizon)
    lam_b = _clock(trace.blue_intervals)
    end = trace.horizon
    blue_total = lam_b(end)

    # (a) queue-without-repetition reconstruction: first blue arrival per type
    first = {}
    for i in range(1, trace.n_arrivals + 1):
        if trace.color[i] == "b":
            j = int(trace.types[i])
            bt = lam_b(float(trace.tau[i]))
            if j not in first or bt < first[j]:
                first[j] = bt
    times = sorted(first.values())
    sizes = [trace.weights.w[j - 1] for j, bt in
             sorted(first.items(), key=lambda kv: kv[1])]
    Y_rec = CadlagStepPath(np.asarray(times), np.asarray(sizes), blue_total)
    pts = np.unique(np.concatenate((Y_rec.times, trace.Y_emb.times,
                                    [0.0, blue_total])))
    pts = pts[pts <= blue_total]
    real = theta(pts)
    ok = np.isfinite(real)
    err_a = float(np.max(np.abs(Y_rec.value(pts[ok])
                                - trace.X.value(real[ok])), initial=0.0))
    results["Y_equals_X_at_theta"] = {
        "pass": bool(err_a < TOL_IDENTITY), "max_abs_err": err_a,
        "n_points": int(ok.sum())}

    # (b) height of the reconstructed path vs H through the blue clock
    # Both sides are step functions; breakpoints computed through the two
    # routes can differ in the last float bit, so near-duplicate times are
    # merged and the comparison runs at midpoints of the merged grid,
    # where both sides are constant.
    H_rec = height_of_path(Y_rec)
    hpts = np.unique(np.concatenate((H_rec.times, trace.H_emb.times)))
    hpts = hpts[hpts <= blue_total]
    scale = max(blue_total, 1.0)
    merged = hpts[np.concatenate(([True], np.diff(hpts) > TOL_IDENTITY * scale))]
    if merged[-1] < blue_total:
        merged = np.concatenate((merged, [blue_total]))
    mids = (merged[:-1] + merged[1:]) / 2.0
    realh = theta(mids)
    okh = np.isfinite(realh)
    err_b = float(np.max(np.abs(H_rec(mids[okh])
                                - trace.H(np.minimum(realh[okh], end))),
                         initial=0.0))
    results["height_through_blue_clock"] = {
        "pass": bool(err_b < TOL_IDENTITY), "max_abs_err": err_b,
        "n_points": int(okh.sum())}

    # (c) X = X^b o Lambda^b + X^r o Lambda^r at event times
    red_intervals = trace.red_blocks
    lam_r = _clock(red_intervals)
    xb_t, xb_s, xr_t, xr_s = [], [], [], []
    for i in range(1, trace.n_arrivals + 1):
        t = float(trace.tau[i])
        wt = float(trace.weights.w[trace.types[i] - 1])
        if trace.blue_side[i]:
            xb_t.append(lam_b(t))
            xb_s.append(wt)
        else:
            xr_t.append(lam_r(t))
            xr_s.append(wt)
    Xb = _cum_steps(xb_t, xb_s)  # jumps only; drift handled via clocks
    Xr = _cum_steps(xr_t, xr_s)
    ev = trace.events()
    ev = ev[ev <= end]
    lhs = trace.X.value(ev)
    lb, lr = lam_b(ev), lam_r(ev)
    rhs = (Xb(lb) - lb) + (Xr(lr) - lr)
    err_c = float(np.max(np.abs(lhs - rhs), initial=0.0))
    results["blue_red_decomposition"] = {
        "pass": bool(err_c < TOL_IDENTITY), "max_abs_err": err_c,
        "n_points": int(ev.size)}

    # (d) M = 2N - H: M counts jump times of H
    dep = trace.departure[1:]
    dep = dep[np.isfinite(dep)]
    M = (np.searchsorted(np.sort(trace.tau[1:]), ev, side="right")
         + np.searchsorted(np.sort(dep), ev, side="right"))
    N = np.searchsorted(np.sort(trace.tau[1:]), ev, side="right")
    err_d = float(np.max(np.abs(M - (2 * N - trace.H(ev))), initial=0.0))
    results["H_jump_counter"] = {
        "pass": bool(err_d < TOL_IDENTITY), "max_abs_err": err_d,
        "n_points": int(ev.size)}

    blue_types = [int(trace.types[i]) for i in range(1, trace.n_arrivals + 1)
                  if trace.color[i] == "b"]
    distinct = len(blue_types) == len(set(blue_types))
    results["blue_types_distinct"] = {
        "pass": bool(distinct), "max_abs_err": 0.0 if distinct else 1.0,
        "n_points": len(blue_types)}
    return IdentityReport(results)
