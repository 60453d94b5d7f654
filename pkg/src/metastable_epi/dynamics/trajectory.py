"""Piecewise-constant trajectories and their event logs."""
import math
from dataclasses import dataclass

import numpy as np

from .model import I, Variant


class Censored(float):
    """Extinction time not observed: the value is the censoring horizon."""

    censored = True

    def __repr__(self):
        return f"Censored({float(self)!r})"


@dataclass(frozen=True)
class Trajectory:
    """Initial configuration plus a time-ordered log of single-vertex flips.

    ``censored`` is true when infection is still present at the end of the
    observation window ``[0, horizon]``.
    """

    initial: np.ndarray
    times: np.ndarray
    vertices: np.ndarray
    old: np.ndarray
    new: np.ndarray
    horizon: float
    censored: bool
    n_events: int = -1

    def __post_init__(self):
        for name in ("initial", "times", "vertices", "old", "new"):
            getattr(self, name).setflags(write=False)
        if self.n_events < 0:
            object.__setattr__(self, "n_events", int(self.times.size))

    @property
    def n(self):
        return int(self.initial.size)

    def __len__(self):
        return int(self.times.size)

    def events(self):
        """Iterate ``(time, vertex, old, new)`` tuples."""
        return zip(self.times.tolist(), self.vertices.tolist(), self.old.tolist(), self.new.tolist())

    def infected_counts(self):
        """Number of infected vertices after each event."""
        delta = (self.new == I).astype(np.int64) - (self.old == I).astype(np.int64)
        return int((self.initial == I).sum()) + np.cumsum(delta)

    def state_at(self, t):
        """Configuration at time ``t``; an event at exactly ``t`` has happened."""
        k = int(np.searchsorted(self.times, t, side="right"))
        cfg = self.initial.copy()
        cfg[self.vertices[:k]] = self.new[:k]
        return cfg

    def to_csv(self, path):
        """Write ``time,vertex,from,to`` rows."""
        from ..io import write_trace
        write_trace(path, self)


def extinction_time(traj):
    """First time no vertex is infected, or :class:`Censored` (horizon)."""
    if not (traj.initial == I).any():
        return 0.0
    counts = traj.infected_counts()
    hit = np.flatnonzero(counts == 0)
    if hit.size:
        return float(traj.times[hit[0]])
    return Censored(traj.horizon)


def is_censored(value):
    return isinstance(value, Censored) or (isinstance(value, float) and math.isinf(value))


_LEGAL = {
    "SIRS": {(0, 1), (1, 2), (2, 0)},
    "SIS": {(0, 1), (1, 0)},
}


def check_trajectory(g, params, traj):
    """List every violated trajectory invariant (empty when all hold).

    Checked: strictly increasing event times inside ``[0, horizon]``, legal
    transitions for the variant, each logged ``old`` state matching the
    replayed configuration, and at least one infected neighbour just before
    every ``S -> I`` flip.
    """
    problems = []
    if traj.times.size:
        if (np.diff(traj.times) <= 0).any():
            problems.append("event times are not strictly increasing")
        if traj.times[0] < 0 or traj.times[-1] > traj.horizon:
            problems.append("event time outside [0, horizon]")
    legal = _LEGAL["SIS" if params.variant == Variant.SIS else "SIRS"]
    cfg = traj.initial.copy()
    n_inf_nb = np.zeros(g.n, dtype=np.int64)
    for v in np.flatnonzero(cfg == I):
        n_inf_nb[g.neighbors(v)] += 1
    for j, (t, v, a, b) in enumerate(traj.events()):
        if cfg[v] != a:
            problems.append(f"event {j}: vertex {v} logged in state {a}, replay has {cfg[v]}")
            break
        if (a, b) not in legal:
            problems.append(f"event {j}: illegal transition {a}->{b} at vertex {v}")
        if b == I and n_inf_nb[v] == 0:
            problems.append(f"event {j}: vertex {v} infected at t={t} with no infected neighbour")
        if b == I:
            n_inf_nb[g.neighbors(v)] += 1
        elif a == I:
            n_inf_nb[g.neighbors(v)] -= 1
        cfg[v] = b
        if params.variant == Variant.SIR and b == 0 and a == 2:
            problems.append(f"event {j}: SIR vertex {v} lost immunity")
    if bool((cfg == I).any()) != traj.censored:
        problems.append("censored flag does not match the final configuration")
    return problems
