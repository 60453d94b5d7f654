"""Configuration-model power-law graphs and structural diagnostics.

Degrees are i.i.d. with ``P(D = k) = C_tau * k**-tau`` for ``k >= 3``,
conditioned (by whole-vector rejection) on an even total.  Half-edges are
paired by a uniform perfect matching; the resulting multigraph is projected
to a simple graph before any dynamics run on it.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit
from scipy import special

from .rng import generator

#: Degree values up to this cutoff are sampled from an exact inverse-CDF
#: table; larger values come from the analytic Pareto tail.
TABLE_MAX = 10**6

#: Largest vertex count for which :func:`diameter` runs all-source BFS.
EXACT_DIAMETER_MAX_N = 10**5

_DEGREE_STREAM = 0
_PAIRING_STREAM = 1
_ECCENTRICITY_STREAM = 2


def _frozen(a, dtype=np.int64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _check_tau(tau):
    if not tau > 2:
        raise ValueError(f"tau must exceed 2, got {tau!r}")


def normalizer(tau):
    """``C_tau = 1 / sum_{j >= 3} j**-tau``."""
    _check_tau(tau)
    return 1.0 / float(special.zeta(tau, 3))


def mean_degree(tau):
    """Mean of the degree law, ``C_tau * sum_{k >= 3} k**(1 - tau)``."""
    _check_tau(tau)
    return normalizer(tau) * float(special.zeta(tau - 1.0, 3))


def degree_pmf(k, tau):
    """Probability mass of the degree law at ``k`` (vectorised)."""
    k = np.asarray(k, dtype=np.float64)
    return np.where(k >= 3, normalizer(tau) * np.maximum(k, 1.0) ** -tau, 0.0)


@lru_cache(maxsize=16)
def _survival_table(tau):
    # sf[j] = P(D > 3 + j) for 3 + j in [3, TABLE_MAX]
    k = np.arange(3, TABLE_MAX + 1, dtype=np.float64)
    sf = normalizer(tau) * special.zeta(tau, k + 1.0)
    sf.setflags(write=False)
    return sf


def _draw_degrees(rng, n, tau):
    sf = _survival_table(tau)
    s = rng.random(n)
    s = 1.0 - s  # in (0, 1]
    j = np.searchsorted(-sf, -s, side="right")
    deg = 3 + j.astype(np.int64)
    tail = j >= sf.size
    if tail.any():
        # P(D >= k) ~ C (k - 1/2)**(1 - tau) / (tau - 1) beyond the table
        c = normalizer(tau)
        x = (s[tail] * (tau - 1.0) / c) ** (-1.0 / (tau - 1.0)) + 0.5
        deg[tail] = np.maximum(np.floor(x).astype(np.int64), TABLE_MAX + 1)
    return deg


@dataclass(frozen=True)
class DegreeSequence:
    """Degree vector with the parameters that produced it."""

    degrees: np.ndarray
    tau: float = math.nan
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "degrees", _frozen(self.degrees))

    @property
    def n(self):
        return int(self.degrees.size)

    @property
    def total(self):
        return int(self.degrees.sum())


def sample_degree_sequence(n, tau, seed):
    """Sample ``n`` i.i.d. power-law degrees conditioned on an even sum.

    The whole vector is redrawn until its sum is even, which is exactly the
    conditional law.  Deterministic in ``(n, tau, seed)``.
    """
    _check_tau(tau)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = generator(seed, _DEGREE_STREAM)
    while True:
        deg = _draw_degrees(rng, int(n), float(tau))
        if deg.sum() % 2 == 0:
            return DegreeSequence(deg, float(tau), int(seed))


@dataclass(frozen=True)
class Multigraph:
    """Configuration-model multigraph.

    Half-edge ``h`` belongs to vertex ``stub_vertex[h]`` in local slot
    ``stub_slot[h]``; ``pairing`` is an ``(m, 2)`` array of half-edge ids.
    """

    n: int
    stub_vertex: np.ndarray
    stub_slot: np.ndarray
    pairing: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "stub_vertex", _frozen(self.stub_vertex))
        object.__setattr__(self, "stub_slot", _frozen(self.stub_slot))
        object.__setattr__(self, "pairing", _frozen(self.pairing).reshape(-1, 2))

    @classmethod
    def from_edges(cls, n, edges):
        """Build a multigraph whose pairs are the given vertex pairs."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        ends = edges.ravel()
        if ends.size and (ends.min() < 0 or ends.max() >= n):
            raise ValueError("edge endpoint out of range")
        slot = np.zeros(ends.size, dtype=np.int64)
        seen = np.zeros(n, dtype=np.int64)
        for h, v in enumerate(ends):
            slot[h] = seen[v]
            seen[v] += 1
        return cls(n, ends, slot, np.arange(ends.size).reshape(-1, 2))

    @property
    def m(self):
        return int(self.pairing.shape[0])

    @property
    def edges(self):
        """Vertex pairs, one row per half-edge pair (loops and repeats kept)."""
        return self.stub_vertex[self.pairing]

    @property
    def degrees(self):
        return np.bincount(self.stub_vertex, minlength=self.n)

    def multiplicities(self):
        """Map ``(u, v)`` with ``u <= v`` to the number of parallel edges."""
        e = np.sort(self.edges, axis=1)
        pairs, counts = np.unique(e, axis=0, return_counts=True)
        return {(int(u), int(v)): int(c) for (u, v), c in zip(pairs, counts)}


def pair_half_edges(deg, seed):
    """Uniform random perfect matching of half-edges.

    The half-edge array is Fisher-Yates shuffled and consecutive entries are
    paired.  ``deg`` is a :class:`DegreeSequence` or a plain list of
    non-negative degrees with an even sum.
    """
    degrees = deg.degrees if isinstance(deg, DegreeSequence) else np.asarray(deg, dtype=np.int64)
    if degrees.ndim != 1 or (degrees < 0).any():
        raise ValueError("degrees must be a 1-d array of non-negative integers")
    total = int(degrees.sum())
    if total % 2:
        raise ValueError(f"degree sum {total} is odd; half-edges cannot be perfectly paired")
    n = degrees.size
    stub_vertex = np.repeat(np.arange(n, dtype=np.int64), degrees)
    offsets = np.concatenate(([0], np.cumsum(degrees)[:-1]))
    stub_slot = np.arange(total, dtype=np.int64) - np.repeat(offsets, degrees)
    perm = generator(seed, _PAIRING_STREAM).permutation(total)
    return Multigraph(n, stub_vertex, stub_slot, perm.reshape(-1, 2))


@dataclass(frozen=True, eq=False)
class SimpleGraph:
    """Undirected simple graph stored as a sorted edge array plus CSR lists.

    ``edges`` has rows ``u < v`` in lexicographic order; the neighbours of
    ``v`` are ``indices[indptr[v]:indptr[v + 1]]`` in increasing order.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n, edges):
        """Normalise an edge list: drop loops, collapse repeats, sort."""
        n = int(n)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        e = np.sort(e, axis=1)
        if e.size:
            e = np.unique(e, axis=0)
        src = np.concatenate((e[:, 0], e[:, 1]))
        dst = np.concatenate((e[:, 1], e[:, 0]))
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, _frozen(e).reshape(-1, 2), _frozen(indptr), _frozen(dst[order]))

    @property
    def m(self):
        return int(self.edges.shape[0])

    @property
    def degrees(self):
        return np.diff(self.indptr)

    def degree(self, v):
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u, v):
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def edge_set(self):
        return {(int(u), int(v)) for u, v in self.edges}

    def __eq__(self, other):
        if not isinstance(other, SimpleGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None


def simple_projection(g):
    """Delete self-loops and collapse parallel edges of a multigraph."""
    return SimpleGraph.from_edges(g.n, g.edges)


def generate_graph(n, tau, seed):
    """Sample ``G(n, tau)`` and return ``(degree_sequence, multigraph, simple)``."""
    deg = sample_degree_sequence(n, tau, seed)
    mg = pair_half_edges(deg, seed)
    return deg, mg, simple_projection(mg)


# ---------------------------------------------------------------- diameter


class LowerBound(int):
    """Integer hop count that is only a lower bound on the diameter."""

    lower_bound = True

    def __repr__(self):
        return f"LowerBound({int(self)})"


@njit(cache=True)
def _bfs_eccentricity(indptr, indices, source, dist, queue):
    # returns (eccentricity, number of reached vertices); dist must be -1
    dist[source] = 0
    queue[0] = source
    head, tail = 0, 1
    ecc = 0
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        if du > ecc:
            ecc = du
        for p in range(indptr[u], indptr[u + 1]):
            w = indices[p]
            if dist[w] < 0:
                dist[w] = du + 1
                queue[tail] = w
                tail += 1
    for i in range(tail):
        dist[queue[i]] = -1
    return ecc, tail


@njit(cache=True)
def _all_source_diameter(indptr, indices, n):
    dist = -np.ones(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    best = 0
    for s in range(n):
        ecc, reached = _bfs_eccentricity(indptr, indices, s, dist, queue)
        if reached < n:
            return -1
        if ecc > best:
            best = ecc
    return best


@njit(cache=True)
def _sampled_eccentricity(indptr, indices, n, sources):
    dist = -np.ones(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    best = 0
    for s in sources:
        ecc, reached = _bfs_eccentricity(indptr, indices, s, dist, queue)
        if reached < n:
            return -1
        if ecc > best:
            best = ecc
        # double sweep: restart from the farthest vertex found
        far = queue[reached - 1]
        ecc, reached = _bfs_eccentricity(indptr, indices, far, dist, queue)
        if ecc > best:
            best = ecc
    return best


def diameter(g, exact_max_n=EXACT_DIAMETER_MAX_N, samples=32, seed=0):
    """Largest shortest-path hop distance, or ``math.inf`` if disconnected.

    Exact (all-source BFS) when ``g.n <= exact_max_n``.  Above that a
    :class:`LowerBound` from ``samples`` double-sweep BFS runs is returned.
    """
    if g.n <= 1:
        return 0
    if g.n <= exact_max_n:
        d = _all_source_diameter(g.indptr, g.indices, g.n)
        return math.inf if d < 0 else int(d)
    sources = generator(seed, _ECCENTRICITY_STREAM).choice(g.n, size=min(samples, g.n), replace=False)
    d = _sampled_eccentricity(g.indptr, g.indices, g.n, sources.astype(np.int64))
    return math.inf if d < 0 else LowerBound(d)


# ---------------------------------------------------------- degree event


@dataclass(frozen=True)
class DegreeEventReport:
    """Both clauses of the order-statistics regularity event.

    ``violating_indices`` are 1-based order-statistic ranks ``i`` (over the
    whole range ``1..n``) whose value leaves the envelope
    ``[c1 (n/i)**(1/(tau-1)), c2 (n/i)**(1/(tau-1))]``; only ranks
    ``i >= window_start = ceil(n**epsilon)`` count against ``order_stats_ok``.
    """

    epsilon: float
    order_stats_ok: bool
    sum_ok: bool
    violating_indices: list
    mu: float
    c1: float
    c2: float
    window_start: int
    degree_sum: int

    @property
    def holds(self):
        return self.order_stats_ok and self.sum_ok


def envelope_constants(tau, lower=5.0, upper=8.0):
    """``(c1, c2)`` for the order-statistics envelope."""
    base = (normalizer(tau) / (tau - 1.0)) ** (1.0 / (tau - 1.0))
    return base * lower ** (-1.0 / (tau - 1.0)), base * upper ** (1.0 / (tau - 1.0))


def check_degree_event(deg, epsilon, tau=None, lower=5.0, upper=8.0):
    """Evaluate the degree regularity event for a degree sequence.

    ``lower`` and ``upper`` are the constants inside ``c1`` and ``c2``; the
    defaults 5 and 8 are sufficient, not tight.
    """
    tau = deg.tau if tau is None else tau
    _check_tau(tau)
    if not 0 < epsilon < 1.0 / (2.0 * tau - 1.0):
        raise ValueError(f"epsilon must lie in (0, 1/(2 tau - 1)) = (0, {1 / (2 * tau - 1):.6g}), got {epsilon!r}")
    d = np.sort(np.asarray(deg.degrees))[::-1]
    n = d.size
    c1, c2 = envelope_constants(tau, lower, upper)
    i = np.arange(1, n + 1, dtype=np.float64)
    scale = (n / i) ** (1.0 / (tau - 1.0))
    bad = (d < c1 * scale) | (d > c2 * scale)
    violating = (np.flatnonzero(bad) + 1).tolist()
    start = math.ceil(n**epsilon)
    order_ok = not bad[start - 1:].any()
    mu = mean_degree(tau)
    total = int(d.sum())
    return DegreeEventReport(
        epsilon=float(epsilon),
        order_stats_ok=bool(order_ok),
        sum_ok=bool(abs(total - n * mu) <= 0.5 * n * mu),
        violating_indices=violating,
        mu=mu,
        c1=c1,
        c2=c2,
        window_start=start,
        degree_sum=total,
    )
