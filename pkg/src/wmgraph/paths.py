"""Piecewise path representations used by the queue encodings.

Two exact (breakpoint-based, no gridding) representations:

* ``CadlagStepPath`` -- drift -1 between positive jumps at strictly
  increasing times; the load paths of both queues.
* ``StepFunction`` -- piecewise-constant cadlag function; height paths,
  and coding functions of metric spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CadlagStepPath:
    """Path t -> -t + sum of jump sizes at times <= t.

    ``times`` strictly increasing, ``sizes`` positive.  ``horizon`` is the
    right end of the observation window (the path itself extends past it
    with pure drift).
    """

    times: np.ndarray
    sizes: np.ndarray
    horizon: float
    _cum: np.ndarray = field(repr=False, compare=False, default=None)

    def __init__(self, times, sizes, horizon):
        times = np.asarray(times, dtype=float)
        sizes = np.asarray(sizes, dtype=float)
        if times.shape != sizes.shape or times.ndim != 1:
            raise ValueError("times and sizes must be 1-d of equal length")
        if times.size and (np.any(np.diff(times) <= 0) or np.any(sizes <= 0)):
            raise ValueError("times must be strictly increasing, sizes positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "horizon", float(horizon))
        object.__setattr__(self, "_cum", np.concatenate(([0.0], np.cumsum(sizes))))

    def value(self, t):
        """Cadlag value at t (scalar or array)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        out = -t + self._cum[idx]
        return float(out) if out.ndim == 0 else out

    def value_left(self, t):
        """Left limit at t."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="left")
        out = -t + self._cum[idx]
        return float(out) if out.ndim == 0 else out

    def running_inf(self, t):
        """Running infimum J_t = inf_{s <= t} of the path (value 0 at time 0).

        Between jumps the path decreases, so the infimum is attained at
        left limits of jump times or at t itself.
        """
        scalar = np.isscalar(t)
        t = np.atleast_1d(np.asarray(t, dtype=float))
        pre = -self.times + self._cum[:-1]          # value just before each jump
        lows = np.minimum.accumulate(np.concatenate(([0.0], pre)))
        idx = np.searchsorted(self.times, t, side="right")
        out = np.minimum(lows[idx], self.value(t))
        return float(out[0]) if scalar else out

    def min_on(self, a: float, b: float) -> float:
        """Minimum of the path over the closed interval [a, b]."""
        if b < a:
            a, b = b, a
        lo, hi = np.searchsorted(self.times, a, side="right"), \
            np.searchsorted(self.times, b, side="right")
        m = self.value(b)
        if hi > lo:
            pre = -self.times[lo:hi] + self._cum[lo:hi]
            m = min(m, float(pre.min()))
        return m


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant cadlag function: value ``values[i]`` on [times[i], times[i+1])."""

    times: np.ndarray
    values: np.ndarray

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size == 0:
            raise ValueError("times and values must be nonempty 1-d of equal length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right") - 1
        out = self.values[np.clip(idx, 0, None)]
        out = np.where(idx < 0, self.values[0], out)  # constant extension left
        return float(out) if out.ndim == 0 else out

    def min_on(self, a: float, b: float) -> float:
        """Minimum over [a, b] (the function is constant between breakpoints)."""
        if b < a:
            a, b = b, a
        lo = np.searchsorted(self.times, a, side="right") - 1
        hi = np.searchsorted(self.times, b, side="right") - 1
        lo = max(lo, 0)
        return float(self.values[lo:hi + 1].min())

    def max_on(self, a: float, b: float) -> float:
        if b < a:
            a, b = b, a
        lo = np.searchsorted(self.times, a, side="right") - 1
        hi = np.searchsorted(self.times, b, side="right") - 1
        lo = max(lo, 0)
        return float(self.values[lo:hi + 1].max())

    def shifted(self, dt: float) -> "StepFunction":
        return StepFunction(self.times + dt, self.values)

    def restricted(self, a: float, b: float) -> "StepFunction":
        """Restriction to [a, b), re-anchored so a breakpoint sits at a."""
        lo = np.searchsorted(self.times, a, side="right") - 1
        hi = np.searchsorted(self.times, b, side="left")
        times = self.times[max(lo, 0):hi].copy()
        values = self.values[max(lo, 0):hi].copy()
        if times.size == 0 or times[0] > a:
            times = np.concatenate(([a], times))
            values = np.concatenate(([self(a)], values))
        else:
            times[0] = a
        return StepFunction(times, values)


def uniform_distance(f: StepFunction, g: StepFunction) -> float:
    """sup |f - g| over [0, infinity), both extended by their last value."""
    grid = np.union1d(f.times, g.times)
    return float(np.max(np.abs(f(grid) - g(grid))))


def modulus_of_continuity(f: StepFunction, delta: float) -> float:
    """Exact max of |f(s) - f(t)| over |s - t| <= delta for a step function.

    The extrema of f over a closed window are attained at breakpoint
    values inside the window or at the value in force at its left edge,
    so it suffices to scan windows ending at each breakpoint and at each
    breakpoint + delta.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    t, v = f.times, f.values
    best = 0.0
    # any positive window straddles each single jump; computing this floor
    # directly keeps deltas below the breakpoint ulp scale exact
    if delta > 0 and v.size > 1:
        best = float(np.max(np.abs(np.diff(v))))
    ends = np.union1d(t, t + delta)
    for u in ends:
        lo_edge = f(max(u - delta, t[0]))
        i = np.searchsorted(t, u - delta, side="right")
        j = np.searchsorted(t, u, side="right")
        if i < j:
            seg = v[i:j]
            hi = max(float(seg.max()), lo_edge)
            lo = min(float(seg.min()), lo_edge)
            best = max(best, hi - lo)
    return float(best)


def height_of_path(y: CadlagStepPath) -> StepFunction:
    """Height functional of a drift -1 step path.

    At time t it counts the jump times s <= t whose pre-jump level still
    lies strictly below the infimum of the path over [s, t]; equivalently
    the stack of unfinished jump records.  Computed by a stack replay:
    a record with pre-jump level p is closed when the path drifts back
    down to p.
    """
    times = [0.0]
    values = [0]
    stack = []  # pre-jump levels
    cur_t, cur_v = 0.0, 0.0
    for t, x in zip(y.times, y.sizes):
        # drift from cur_t to t: close records whose level is reached
        while stack and cur_v - (t - cur_t) <= stack[-1]:
            p = stack.pop()
            dep = cur_t + (cur_v - p)
            cur_t, cur_v = dep, p
            times.append(dep)
            values.append(len(stack))
        pre = cur_v - (t - cur_t)
        stack.append(pre)
        cur_t, cur_v = t, pre + x
        times.append(t)
        values.append(len(stack))
    while stack:
        p = stack.pop()
        dep = cur_t + (cur_v - p)
        cur_t, cur_v = dep, p
        times.append(dep)
        values.append(len(stack))
    # collapse repeated breakpoints (a departure coinciding with an arrival)
    times = np.asarray(times)
    values = np.asarray(values, dtype=float)
    keep = np.concatenate((np.diff(times) > 0, [True]))
    return StepFunction(times[keep], values[keep])
