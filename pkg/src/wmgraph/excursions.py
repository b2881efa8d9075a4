"""Excursion extraction, canonical ordering, and pinch relocation.

Excursions of a load path above its running infimum are the busy
periods of the queue; their lengths are the weight masses of the graph
components.  Excursions of the height path above zero are the same
intervals.  The canonical order is nonincreasing length, ties broken by
the smaller left endpoint.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .paths import CadlagStepPath, StepFunction

# Strictness tolerance used only for gridded paths, where roundoff can
# manufacture micro-excursions; exact breakpoint paths use exact compares.
TOL_EXC = 1e-12


@dataclass(frozen=True)
class ExcursionDecomposition:
    intervals: tuple        # (l_k, r_k) in canonical order
    lengths: np.ndarray     # nonincreasing
    local_paths: tuple      # per-excursion coding path (StepFunction) or None
    local_pinches: tuple    # filled by assign_pinches
    near_ties: tuple        # pairs of excursion indices with |len_i-len_j| < 10*TOL_EXC

    @property
    def count(self) -> int:
        return len(self.intervals)

    def write_masses_csv(self, path, top_k: int = 50):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["rank", "mass"])
            for i, z in enumerate(self.lengths[:top_k], start=1):
                wr.writerow([i, repr(float(z))])


def _canonical_order(intervals, lengths):
    idx = sorted(range(len(intervals)),
                 key=lambda k: (-lengths[k], intervals[k][0]))
    return idx


def _near_ties(lengths):
    out = []
    srt = sorted(range(len(lengths)), key=lambda k: lengths[k])
    for a, b in zip(srt, srt[1:]):
        if abs(lengths[a] - lengths[b]) < 10 * TOL_EXC and lengths[a] > 0:
            out.append((min(a, b), max(a, b)))
    return tuple(out)


def excursions_above_zero(h, horizon: float | None = None,
                          grid_tol: float | None = None) -> ExcursionDecomposition:
    """Maximal intervals where h > 0, canonically ordered.

    ``h`` is a StepFunction (exact) or a (times, values) grid pair, in
    which case values are treated as constant per cell and compared
    against ``grid_tol`` (default TOL_EXC).
    """
    if isinstance(h, StepFunction):
        times, values = h.times, h.values
        thresh = 0.0
        end = float(times[-1]) if horizon is None else float(horizon)
    else:
        times, values = h
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        thresh = TOL_EXC if grid_tol is None else grid_tol
        step = times[1] - times[0] if times.size > 1 else 0.0
        end = float(times[-1] + step) if horizon is None else float(horizon)
    intervals = []
    open_at = None
    for t, v in zip(times, values):
        if v > thresh and open_at is None:
            open_at = float(t)
        elif v <= thresh and open_at is not None:
            intervals.append((open_at, float(t)))
            open_at = None
    if open_at is not None:
        intervals.append((open_at, end))
    lengths = [r - l for l, r in intervals]
    order = _canonical_order(intervals, lengths)
    intervals = [intervals[k] for k in order]
    lengths = np.asarray([lengths[k] for k in order])
    # local coding paths carry a terminal zero breakpoint at the excursion
    # length, so their domain end (zeta) is the last breakpoint
    def _local(l, r):
        g = h.restricted(l, r).shifted(-l)
        return StepFunction(np.concatenate((g.times, [r - l])),
                            np.concatenate((g.values, [0.0])))
    locals_ = tuple(_local(l, r) if isinstance(h, StepFunction) else None
                    for l, r in intervals)
    return ExcursionDecomposition(
        intervals=tuple(intervals), lengths=lengths, local_paths=locals_,
        local_pinches=tuple(() for _ in intervals), near_ties=_near_ties(lengths))


def excursion_masses(y, top_k: int | None = None) -> np.ndarray:
    """Lengths of the maximal intervals where y exceeds its running
    infimum, sorted nonincreasing.

    For breakpoint paths (drift -1, positive jumps) each excursion length
    equals the sum of the jump sizes inside it, so lengths are computed by
    summation, free of endpoint cancellation.
    """
    if isinstance(y, CadlagStepPath):
        lengths = [z for _, z, _ in _step_excursions(y)]
    else:
        times, values = y
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        run = np.minimum.accumulate(values)
        dec = excursions_above_zero((times, values - run))
        lengths = list(dec.lengths)
    lengths.sort(reverse=True)
    out = np.asarray(lengths)
    return out[:top_k] if top_k is not None else out


def _step_excursions(y: CadlagStepPath):
    """(start, length, jump index list) per excursion of y above its
    running infimum, in time order; length = fsum of member jump sizes."""
    out = []
    start, members, acc, run = None, [], [], 0.0
    for i, (t, x) in enumerate(zip(y.times, y.sizes)):
        if start is None or t >= start + run:
            if start is not None:
                out.append((start, math.fsum(acc), members))
            start, members, acc, run = float(t), [], [], 0.0
        members.append(i)
        acc.append(float(x))
        run += x
    if start is not None:
        out.append((start, math.fsum(acc), members))
    return out


def decompose_with_masses(y: CadlagStepPath) -> ExcursionDecomposition:
    """Excursion decomposition of a load path above its running infimum,
    with exact summed lengths."""
    raw = _step_excursions(y)
    intervals = [(s, s + z) for s, z, _ in raw]
    lengths = [z for _, z, _ in raw]
    locals_ = [
        CadlagStepPath(y.times[members] - s, y.sizes[members], horizon=z)
        for s, z, members in raw]
    order = _canonical_order(intervals, lengths)
    return ExcursionDecomposition(
        intervals=tuple(intervals[k] for k in order),
        lengths=np.asarray([lengths[k] for k in order]),
        local_paths=tuple(locals_[k] for k in order),
        local_pinches=tuple(() for _ in order),
        near_ties=_near_ties([lengths[k] for k in order]))


def assign_pinches(dec: ExcursionDecomposition, pinches) -> ExcursionDecomposition:
    """Localize pinch points: (s_p - l_k, t_p - l_k) in the excursion whose
    interval contains t_p, sorted by t within each excursion."""
    local = [[] for _ in dec.intervals]
    for i in range(pinches.size):
        t_p, s_p, y_p = float(pinches.t[i]), float(pinches.s[i]), float(pinches.y[i])
        for k, (l, r) in enumerate(dec.intervals):
            if l <= t_p < r:
                if not l <= s_p <= t_p:
                    raise ValueError("pinch start escapes its excursion")
                local[k].append((s_p - l, t_p - l, y_p))
                break
        else:
            raise ValueError(f"pinch at t={t_p} lies outside every excursion")
    for lst in local:
        lst.sort(key=lambda p: p[1])
    from dataclasses import replace
    return replace(dec, local_pinches=tuple(tuple(lst) for lst in local))
