"""Pathwise construction from independent Poisson mark streams.

Every vertex carries recovery marks (rate 1) and waning marks (rate
``rho``); every directed edge ``u -> v`` carries infection marks (rate
``lam``).  For the threshold variant the infection marks sit on vertices.
Marks are applied in time order:

* recovery at ``v``: ``I -> R`` (``I -> S`` for SIS) if ``v`` is infected;
* waning at ``v``: ``R -> S`` if ``v`` is recovered;
* infection ``u -> v``: ``S -> I`` if ``u`` is infected and ``v`` susceptible;
  threshold infection at ``v``: ``S -> I`` if some neighbour is infected.

Any other mark is a no-op.  Exact ties are resolved by
``(time, kind, source, target)`` with kinds ordered recovery < waning <
infection.
"""
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..rng import generator
from .model import I, R, S, Variant, as_configuration, check_variant_states
from .trajectory import Trajectory

REC, SUS, INF = 0, 1, 2

#: Default cap on the expected number of marks in one stream.
MAX_MARKS = 5 * 10**7

_STREAM_TAG = 7


class MarkBudgetExceeded(RuntimeError):
    """Raised when a mark stream would not fit the memory budget."""


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MarkList:
    """Grouped sorted mark times: group ``j`` is ``times[ptr[j]:ptr[j+1]]``."""

    ptr: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "ptr", _frozen(self.ptr, np.int64))
        object.__setattr__(self, "times", _frozen(self.times, np.float64))

    @property
    def groups(self):
        return self.ptr.size - 1

    def __getitem__(self, j):
        return self.times[self.ptr[j]:self.ptr[j + 1]]

    def counts(self):
        return np.diff(self.ptr)

    @classmethod
    def empty(cls, groups):
        return cls(np.zeros(groups + 1, dtype=np.int64), np.empty(0))

    @classmethod
    def from_lists(cls, lists):
        lists = [np.sort(np.asarray(x, dtype=np.float64)) for x in lists]
        ptr = np.zeros(len(lists) + 1, dtype=np.int64)
        np.cumsum([x.size for x in lists], out=ptr[1:])
        times = np.concatenate(lists) if lists else np.empty(0)
        return cls(ptr, times)


@dataclass(frozen=True)
class HarrisStream:
    """Mark streams for one graph, variant and horizon.

    ``inf`` is indexed by directed-edge slot (the CSR position of ``v`` in
    the neighbour list of ``u`` for ``u -> v``), or by vertex for the
    threshold variant.
    """

    n: int
    rec: MarkList
    sus: MarkList
    inf: MarkList
    variant: Variant
    horizon: float
    seed: int = -1

    @property
    def inf_on_vertices(self):
        return self.variant == Variant.THRESHOLD_SIRS

    def total_marks(self):
        return int(self.rec.times.size + self.sus.times.size + self.inf.times.size)

    @classmethod
    def from_marks(cls, g, params, horizon, rec=None, sus=None, inf=None):
        """Hand-built stream.

        ``rec`` and ``sus`` map vertices to mark times; ``inf`` maps
        ``(u, v)`` directed edges (or vertices for the threshold variant) to
        mark times.
        """
        params_variant = Variant.parse(params.variant)
        rec = rec or {}
        sus = sus or {}
        inf = inf or {}
        if params_variant == Variant.THRESHOLD_SIRS:
            inf_lists = [inf.get(v, ()) for v in range(g.n)]
        else:
            inf_lists = [[] for _ in range(2 * g.m)]
            for (u, v), ts in inf.items():
                nb = g.neighbors(u)
                p = int(np.searchsorted(nb, v))
                if p >= nb.size or nb[p] != v:
                    raise ValueError(f"({u}, {v}) is not an edge of the graph")
                inf_lists[int(g.indptr[u]) + p] = ts
        marks = [MarkList.from_lists([d.get(v, ()) for v in range(g.n)]) for d in (rec, sus)]
        stream = cls(g.n, marks[0], marks[1], MarkList.from_lists(inf_lists), params_variant, float(horizon))
        for ml in (stream.rec, stream.sus, stream.inf):
            if ml.times.size and (ml.times.min() < 0 or ml.times.max() > horizon):
                raise ValueError("mark times must lie in [0, horizon]")
        return stream

    def merged(self, indptr):
        """All marks as global arrays ``(time, kind, source, target)`` in
        application order."""
        parts_t, parts_k, parts_s, parts_d = [], [], [], []
        for kind, ml in ((REC, self.rec), (SUS, self.sus)):
            owner = np.repeat(np.arange(ml.groups, dtype=np.int64), ml.counts())
            parts_t.append(ml.times)
            parts_k.append(np.full(owner.size, kind, dtype=np.int8))
            parts_s.append(owner)
            parts_d.append(owner)
        owner = np.repeat(np.arange(self.inf.groups, dtype=np.int64), self.inf.counts())
        if self.inf_on_vertices:
            src = dst = owner
        else:
            # directed slot p belongs to u with indptr[u] <= p < indptr[u+1]
            src = np.searchsorted(indptr, owner, side="right") - 1
            dst = owner  # resolved to a vertex by the caller's indices array
        parts_t.append(self.inf.times)
        parts_k.append(np.full(owner.size, INF, dtype=np.int8))
        parts_s.append(src)
        parts_d.append(dst)
        t = np.concatenate(parts_t)
        k = np.concatenate(parts_k)
        s = np.concatenate(parts_s)
        d = np.concatenate(parts_d)
        return t, k, s, d


def expected_marks(g, params, horizon):
    rho = params.waning_rate
    inf_groups = g.n if params.variant == Variant.THRESHOLD_SIRS else 2 * g.m
    return (g.n * (1.0 + rho) + inf_groups * params.lam) * horizon


def _poisson_marks(rng, groups, rate, horizon):
    if groups == 0 or rate == 0:
        return MarkList.empty(groups)
    counts = rng.poisson(rate * horizon, size=groups)
    owner = np.repeat(np.arange(groups, dtype=np.int64), counts)
    times = rng.uniform(0.0, horizon, size=owner.size)
    order = np.lexsort((times, owner))
    ptr = np.zeros(groups + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return MarkList(ptr, times[order])


def build_harris_stream(g, params, horizon, seed, max_marks=MAX_MARKS):
    """Sample independent Poisson mark lists on ``[0, horizon]``.

    Raises :class:`MarkBudgetExceeded` when the expected number of marks is
    above ``max_marks``; use the event-driven engine for such runs.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    expected = expected_marks(g, params, horizon)
    if expected > max_marks:
        raise MarkBudgetExceeded(
            f"about {expected:.3g} marks expected, budget is {max_marks:.3g}; "
            "use the event-driven engine for this run")
    rng = generator(seed, _STREAM_TAG)
    threshold = params.variant == Variant.THRESHOLD_SIRS
    rec = _poisson_marks(rng, g.n, 1.0, horizon)
    sus = _poisson_marks(rng, g.n, params.waning_rate, horizon)
    inf = _poisson_marks(rng, g.n if threshold else 2 * g.m, params.lam, horizon)
    return HarrisStream(g.n, rec, sus, inf, params.variant, float(horizon), int(seed))


@njit(cache=True)
def _apply_marks(indptr, indices, states, kinds, src, dst, times, sis, threshold,
                 out_t, out_v, out_old, out_new):
    written = 0
    for j in range(times.size):
        kind = kinds[j]
        if kind == REC:
            v = src[j]
            if states[v] != I:
                continue
            new = S if sis else R
        elif kind == SUS:
            v = src[j]
            if states[v] != R:
                continue
            new = S
        elif threshold:
            v = dst[j]
            if states[v] != S:
                continue
            lit = False
            for p in range(indptr[v], indptr[v + 1]):
                if states[indices[p]] == I:
                    lit = True
                    break
            if not lit:
                continue
            new = I
        else:
            v = indices[dst[j]]
            if states[src[j]] != I or states[v] != S:
                continue
            new = I
        out_t[written] = times[j]
        out_v[written] = v
        out_old[written] = states[v]
        out_new[written] = new
        states[v] = new
        written += 1
    return written


def evolve_harris(g, params, init, stream):
    """Apply a mark stream to ``init`` and return the full trajectory.

    Marks are applied up to the stream horizon, including the waning flips
    that follow extinction.
    """
    if stream.n != g.n:
        raise ValueError(f"stream built for {stream.n} vertices, graph has {g.n}")
    if Variant.parse(params.variant) != stream.variant:
        raise ValueError("stream variant does not match model parameters")
    expected_groups = g.n if stream.inf_on_vertices else 2 * g.m
    if stream.inf.groups != expected_groups or stream.rec.groups != g.n or stream.sus.groups != g.n:
        raise ValueError("stream shape does not match the graph")
    init = as_configuration(init, g.n)
    check_variant_states(init, params)
    t, k, s, d = stream.merged(g.indptr)
    tgt = d.copy()
    if not stream.inf_on_vertices:
        edge_marks = k == INF
        tgt[edge_marks] = g.indices[d[edge_marks]]
    order = np.lexsort((tgt, s, k, t))
    t, k, s, d = t[order], k[order], s[order], d[order]
    states = init.copy()
    cap = t.size
    out = (np.empty(cap), np.empty(cap, dtype=np.int64), np.empty(cap, dtype=np.uint8), np.empty(cap, dtype=np.uint8))
    w = _apply_marks(g.indptr, g.indices, states, k, s, d, t,
                     params.variant == Variant.SIS, stream.inf_on_vertices, *out)
    times, vertices, old, new = (a[:w].copy() for a in out)
    return Trajectory(init.copy(), times, vertices, old, new, stream.horizon,
                      censored=bool((states == I).any()))


def simulate_harris(g, params, init, horizon, seed, max_marks=MAX_MARKS):
    """Build a stream and evolve it in one call."""
    return evolve_harris(g, params, init, build_harris_stream(g, params, horizon, seed, max_marks))
