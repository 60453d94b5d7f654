"""Rejection-free event-driven simulation.

Each vertex carries its total transition rate (``lam * k`` or
``lam * 1{k >= 1}`` when susceptible with ``k`` infected neighbours, 1 when
infected, ``rho`` when recovered).  Rates live in a binary sum tree, so
drawing the next vertex and updating a rate both cost ``O(log n)``.  Every
vertex caches its infected-neighbour count, updated in ``O(deg)`` per flip.
"""
import numpy as np
from numba import njit

from ..rng import kernel_seed, uniform_open
from .model import I, R, S, Variant, as_configuration, check_variant_states
from .trajectory import Trajectory

EXTINCT, CENSORED, BUFFER_FULL, EVENT_LIMIT = 0, 1, 2, 3

_SIS = int(Variant.SIS)
_THRESHOLD = int(Variant.THRESHOLD_SIRS)

CHUNK = 1 << 16


@njit(cache=True, inline="always")
def _rate(state, k, lam, rho, variant):
    if state == I:
        return 1.0
    if state == R:
        return rho
    if variant == _THRESHOLD:
        return lam if k > 0 else 0.0
    return lam * k


@njit(cache=True, inline="always")
def _set_leaf(tree, size, v, value):
    i = size + v
    tree[i] = value
    i >>= 1
    while i >= 1:
        tree[i] = tree[2 * i] + tree[2 * i + 1]
        i >>= 1


@njit(cache=True)
def _setup(indptr, indices, states, inf_nb, tree, size, lam, rho, variant):
    n = states.size
    inf_nb[:] = 0
    n_inf = 0
    for v in range(n):
        if states[v] == I:
            n_inf += 1
            for p in range(indptr[v], indptr[v + 1]):
                inf_nb[indices[p]] += 1
    tree[:] = 0.0
    for v in range(n):
        tree[size + v] = _rate(states[v], inf_nb[v], lam, rho, variant)
    for i in range(size - 1, 0, -1):
        tree[i] = tree[2 * i] + tree[2 * i + 1]
    return n_inf


@njit(cache=True, inline="always")
def _pick(tree, size, x):
    i = 1
    while i < size:
        left = tree[2 * i]
        if x < left:
            i = 2 * i
        else:
            x -= left
            i = 2 * i + 1
    return i - size


@njit(cache=True)
def _run(indptr, indices, states, inf_nb, tree, size, lam, rho, variant,
         t, horizon, rng, n_inf, buf_t, buf_v, buf_old, buf_new, record, max_events):
    """Advance until extinction, horizon, full buffer or event budget.

    Returns ``(status, t, rng, n_inf, n_written, n_events)``.
    """
    written = 0
    done = 0
    while True:
        if n_inf == 0:
            return EXTINCT, t, rng, n_inf, written, done
        if done >= max_events:
            return EVENT_LIMIT, t, rng, n_inf, written, done
        if record and written >= buf_t.size:
            return BUFFER_FULL, t, rng, n_inf, written, done
        total = tree[1]
        rng, u = uniform_open(rng)
        t_next = t - np.log(u) / total
        if t_next > horizon:
            return CENSORED, horizon, rng, n_inf, written, done
        t = t_next
        while True:
            rng, u = uniform_open(rng)
            v = _pick(tree, size, u * total)
            if v < states.size and tree[size + v] > 0.0:
                break
        old = states[v]
        if old == S:
            new = I
        elif old == I:
            new = S if variant == _SIS else R
        else:
            new = S
        states[v] = new
        if new == I or old == I:
            step = 1 if new == I else -1
            n_inf += step
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                inf_nb[w] += step
                if states[w] == S:
                    _set_leaf(tree, size, w, _rate(S, inf_nb[w], lam, rho, variant))
        _set_leaf(tree, size, v, _rate(new, inf_nb[v], lam, rho, variant))
        if record:
            buf_t[written] = t
            buf_v[written] = v
            buf_old[written] = old
            buf_new[written] = new
            written += 1
        done += 1


@njit(cache=True)
def _batch_extinction(indptr, indices, init, lam, rho, variant, horizon, seeds, out_time, out_censored, out_events):
    n = init.size
    size = 1
    while size < max(n, 1):
        size *= 2
    states = np.empty(n, dtype=np.uint8)
    inf_nb = np.empty(n, dtype=np.int64)
    tree = np.empty(2 * size, dtype=np.float64)
    dummy_t = np.empty(0, dtype=np.float64)
    dummy_v = np.empty(0, dtype=np.int64)
    dummy_s = np.empty(0, dtype=np.uint8)
    big = np.iinfo(np.int64).max
    for r in range(seeds.size):
        states[:] = init
        n_inf = _setup(indptr, indices, states, inf_nb, tree, size, lam, rho, variant)
        status, t, _, _, _, done = _run(indptr, indices, states, inf_nb, tree, size, lam, rho, variant,
                                        0.0, horizon, seeds[r], n_inf, dummy_t, dummy_v, dummy_s, dummy_s,
                                        False, big)
        out_time[r] = t
        out_censored[r] = status == CENSORED
        out_events[r] = done


class EventDrivenSimulator:
    """Resumable event-driven run on one graph.

    Most callers want :func:`simulate_event_driven`; this class exposes the
    chunked loop so long runs can be driven and measured incrementally.
    """

    def __init__(self, g, params, init, horizon, seed):
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        self.g = g
        self.params = params
        self.init = as_configuration(init, g.n)
        check_variant_states(self.init, params)
        self.horizon = float(horizon)
        self.states = self.init.copy()
        self.inf_nb = np.empty(g.n, dtype=np.int64)
        self.size = 1
        while self.size < max(g.n, 1):
            self.size *= 2
        self.tree = np.empty(2 * self.size, dtype=np.float64)
        self.n_inf = _setup(g.indptr, g.indices, self.states, self.inf_nb, self.tree, self.size,
                            float(params.lam), float(params.waning_rate), int(params.variant))
        self.rng = kernel_seed(seed)
        self.t = 0.0
        self.n_events = 0
        self.status = None

    def advance(self, max_events, buffer=None):
        """Run at most ``max_events`` further events.

        With ``buffer = (times, vertices, old, new)`` the events are written
        into it and the run also pauses when it is full.  Returns the number
        of events written.
        """
        record = buffer is not None
        if not record:
            empty = np.empty(0, dtype=np.float64)
            buffer = (empty, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.uint8), np.empty(0, dtype=np.uint8))
        p = self.params
        status, self.t, rng, self.n_inf, written, done = _run(
            self.g.indptr, self.g.indices, self.states, self.inf_nb, self.tree, self.size,
            float(p.lam), float(p.waning_rate), int(p.variant), self.t, self.horizon, self.rng,
            self.n_inf, *buffer, record, int(max_events))
        # numba hands back a Python int; keep uint64 so states >= 2**63 round-trip
        self.rng = np.uint64(rng)
        self.n_events += done
        self.status = status
        return written

    @property
    def finished(self):
        return self.status in (EXTINCT, CENSORED)


def simulate_event_driven(g, params, init, horizon, seed, max_events=None):
    """Simulate one trajectory with exponential holding times.

    Stops at extinction (no further events are logged), at ``horizon``
    (``censored=True``) or after ``max_events`` events, in which case the
    trajectory is censored at the time of the last event.
    """
    sim = EventDrivenSimulator(g, params, init, horizon, seed)
    limit = np.iinfo(np.int64).max if max_events is None else int(max_events)
    chunks = []
    while True:
        buf = (np.empty(CHUNK), np.empty(CHUNK, dtype=np.int64),
               np.empty(CHUNK, dtype=np.uint8), np.empty(CHUNK, dtype=np.uint8))
        k = sim.advance(limit - sim.n_events, buf)
        chunks.append(tuple(a[:k] for a in buf))
        if sim.status != BUFFER_FULL:
            break
    times, vertices, old, new = (np.concatenate(parts) for parts in zip(*chunks))
    horizon_out = sim.horizon if sim.status != EVENT_LIMIT else sim.t
    return Trajectory(sim.init.copy(), times, vertices, old, new, horizon_out,
                      censored=sim.status != EXTINCT)


def extinction_times(g, params, init, horizon, seeds):
    """Extinction times for many independent runs, without event logs.

    Returns ``(times, censored, n_events)`` arrays aligned with ``seeds``;
    censored runs report ``horizon``.
    """
    init = as_configuration(init, g.n)
    check_variant_states(init, params)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    states = np.array([kernel_seed(s) for s in seeds], dtype=np.uint64)
    out_t = np.empty(states.size)
    out_c = np.empty(states.size, dtype=np.bool_)
    out_e = np.empty(states.size, dtype=np.int64)
    _batch_extinction(g.indptr, g.indices, init, float(params.lam), float(params.waning_rate),
                      int(params.variant), float(horizon), states, out_t, out_c, out_e)
    return out_t, out_c, out_e
