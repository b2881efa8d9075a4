"""Grid simulation of the limit load process and its excursion masses.

Y_t = -alpha*t - (kappa*beta/2)*t^2 + sqrt(beta)*B_t
      + sum_j c_j*(1{E_j <= t} - c_j*kappa*t),  E_j ~ Exp(rate kappa*c_j).

The excursion lengths of Y above its running infimum are the continuum
analogues of the rescaled component masses of the discrete graphs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .excursions import excursion_masses
from .weights import LimitParams

TRUNC_TARGET = 1e-3


@dataclass(frozen=True)
class GridPath:
    dt: float
    T: float
    t: np.ndarray
    values: np.ndarray
    truncation_J: int
    truncation_bound: float
    params: LimitParams
    seed: object

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "Y"])
            for t, v in zip(self.t, self.values):
                wr.writerow([repr(float(t)), repr(float(v))])


def default_truncation(p: LimitParams, T: float) -> int:
    """Smallest J with (kappa/2)*T^2*sum_{j>J} c_j^2 below TRUNC_TARGET."""
    if len(p.c) == 0:
        return 0
    tail = 0.5 * p.kappa * T * T * np.cumsum((p.c ** 2)[::-1])[::-1]
    # tail[j] bounds the contribution of entries j..end
    keep = np.nonzero(tail >= TRUNC_TARGET)[0]
    return int(keep[-1] + 1) if keep.size else 0


def simulate_limit_Y(p: LimitParams, dt: float | None = None, T: float = 1.0,
                     J: int | None = None, rng_seed=0,
                     forced_E=None) -> GridPath:
    """Simulate Y on a uniform grid of step dt (default T*1e-4).

    Brownian increments are N(0, beta*dt); jump times are drawn exactly
    and snapped to the containing cell; the per-jump compensator
    -c_j^2*kappa*t is applied continuously.  ``forced_E`` (test hook)
    fixes the jump times of the first entries of c."""
    if dt is None:
        dt = 1e-4 * T
    if J is None:
        J = len(p.c) if forced_E is not None else default_truncation(p, T)
    J = min(J, len(p.c))
    rng = np.random.default_rng(rng_seed)
    n = int(round(T / dt))
    t = np.arange(n + 1) * dt
    y = -p.alpha * t - 0.5 * p.kappa * p.beta * t * t
    if p.beta > 0:
        incr = rng.normal(0.0, math.sqrt(p.beta * dt), size=n)
        y = y + np.concatenate(([0.0], np.cumsum(incr)))
    c = p.c[:J]
    if c.size:
        if forced_E is not None:
            E = np.asarray(forced_E, dtype=float)
            if E.shape != c.shape:
                raise ValueError("forced_E must give one time per kept c entry")
        else:
            E = rng.exponential(1.0 / (p.kappa * c))
        y = y - np.outer(t, c * c * p.kappa).sum(axis=1)
        for cj, ej in zip(c, E):
            if ej <= T:
                k = int(math.ceil(ej / dt - 1e-12))
                y[k:] += cj
    bound = 0.5 * p.kappa * T * T * float(np.sum(p.c[J:] ** 2))
    return GridPath(dt=dt, T=T, t=t, values=y, truncation_J=J,
                    truncation_bound=bound, params=p, seed=rng_seed)


def limit_masses(g: GridPath, top_k: int = 50) -> np.ndarray:
    """Top-K excursion lengths of the grid path above its running infimum."""
    return excursion_masses((g.t, g.values), top_k=top_k)
