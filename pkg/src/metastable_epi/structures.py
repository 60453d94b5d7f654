"""Hierarchical stars, lit predicates and the exponent ladder.

A ``(k1, k2)`` hierarchical star is a center ``v`` with ``ceil(k1)``
first-layer neighbours ``u_i``, each with ``ceil(k2)`` private second-layer
neighbours ``w_ij``.  The host graph may have further edges among these
vertices; only the designated star edges belong to the structure.
"""
import math
from dataclasses import dataclass

import numpy as np

from .dynamics.model import I
from .graph_core import SimpleGraph
from .rng import generator


def _ceil(x):
    if not x >= 1:
        raise ValueError(f"star sizes must be at least 1, got {x!r}")
    return math.ceil(x)


@dataclass(frozen=True)
class HierarchicalStar:
    center: int
    first_layer: tuple
    second_layer: tuple

    def __post_init__(self):
        object.__setattr__(self, "center", int(self.center))
        object.__setattr__(self, "first_layer", tuple(int(u) for u in self.first_layer))
        object.__setattr__(self, "second_layer", tuple(tuple(int(w) for w in row) for row in self.second_layer))
        if not self.first_layer:
            raise ValueError("a hierarchical star needs at least one first-layer vertex")
        if len(self.second_layer) != len(self.first_layer):
            raise ValueError("second layer must have one row per first-layer vertex")
        widths = {len(row) for row in self.second_layer}
        if len(widths) != 1 or 0 in widths:
            raise ValueError("second-layer rows must be non-empty and of equal length")
        verts = self.vertices()
        if len(set(verts)) != len(verts):
            raise ValueError("hierarchical-star vertices must be pairwise distinct")

    @property
    def k1(self):
        return len(self.first_layer)

    @property
    def k2(self):
        return len(self.second_layer[0])

    def vertices(self):
        out = [self.center, *self.first_layer]
        for row in self.second_layer:
            out.extend(row)
        return out

    @property
    def designated_edges(self):
        """The ``k1 + k1 * k2`` star edges, as ``(parent, child)`` pairs."""
        edges = [(self.center, u) for u in self.first_layer]
        for u, row in zip(self.first_layer, self.second_layer):
            edges.extend((u, w) for w in row)
        return edges

    def validate(self, g):
        """Raise ``ValueError`` unless every designated edge is in ``g``."""
        for a, b in self.designated_edges:
            if not (0 <= a < g.n and 0 <= b < g.n) or not g.has_edge(a, b):
                raise ValueError(f"designated edge ({a}, {b}) is missing from the host graph")

    def is_valid_in(self, g):
        try:
            self.validate(g)
        except ValueError:
            return False
        return True

    def to_dict(self):
        return {"center": self.center, "first_layer": list(self.first_layer),
                "second_layer": [list(r) for r in self.second_layer]}


# ------------------------------------------------------------ predicates


def is_lit(config, v, U, m, graph=None):
    """``v`` is infected, or at least ``m`` vertices of ``U`` are infected.

    When ``graph`` is given, ``U`` must be a set of neighbours of ``v``.
    """
    U = np.asarray(list(U), dtype=np.int64)
    if graph is not None:
        for u in U:
            if not graph.has_edge(v, int(u)):
                raise ValueError(f"{int(u)} is not a neighbour of {v}")
    config = np.asarray(config)
    if config[v] == I:
        return True
    return int((config[U] == I).sum()) >= m


def lit_first_layer(config, hs, k4):
    """Boolean per first-layer vertex: ``k4``-lit among its own leaves."""
    config = np.asarray(config)
    u = np.asarray(hs.first_layer)
    w = np.asarray(hs.second_layer)
    return (config[u] == I) | ((config[w] == I).sum(axis=1) >= k4)


def is_hs_lit(config, hs, k3, k4, graph=None):
    """At least ``ceil(k3)`` first-layer vertices are ``k4``-lit among their
    second-layer sets."""
    if graph is not None:
        hs.validate(graph)
    return int(lit_first_layer(config, hs, k4).sum()) >= math.ceil(k3)


# --------------------------------------------------------- exponent ladder


@dataclass(frozen=True)
class EpsilonLadder:
    delta: float
    tau: float
    lam: float
    rho: float
    eps: float
    eps1: float
    eps2: float
    eps3: float
    eps4: float

    def star_sizes(self, n):
        """``(k1, k2) = (n**eps, n**eps1)`` for an ``n``-vertex graph."""
        return n**self.eps, n**self.eps1

    def epoch_spacing(self, n):
        return 3.0 * n**self.eps2

    def lit_threshold(self, n):
        """First-layer lit threshold ``n**(eps1 / 24)``."""
        return n ** (self.eps1 / 24.0)


def exponent_ladder(delta, tau, lam, rho, halve_delta=True):
    """Exponents driving the survival argument.

    With ``halve_delta`` (the default, used for the all-infected survival
    bound) the base exponent is ``(delta / 2) / (400 tau**3)``; otherwise
    ``delta / (400 tau**3)`` as in the star-counting bound.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not tau > 2:
        raise ValueError("tau must exceed 2")
    if not (lam > 0 and rho > 0):
        raise ValueError("lambda and rho must be positive")
    d = delta / 2.0 if halve_delta else delta
    eps = d / (400.0 * tau**3)
    floor = min(rho, lam, 1.0)
    eps2 = floor * eps / 200.0
    return EpsilonLadder(
        delta=float(delta), tau=float(tau), lam=float(lam), rho=float(rho),
        eps=eps, eps1=eps, eps2=eps2, eps3=eps2 / 4.0, eps4=24.0 * floor / 3200.0 * eps2,
    )


def construction_windows(n, delta, tau):
    """Degree windows and star sizes of the many-disjoint-stars construction.

    Returns a dict with ``k1 = n**et``, ``k2 = n**eps``, centers of degree at
    least ``n**(2 et)`` and first-layer degrees in ``[n**eb, n**(3 eb)]``,
    where ``et = delta / (20 tau)``, ``eb = et / (4.4 tau)`` and
    ``eps = delta / (400 tau**3)``.  At desk-scale ``n`` these all collapse
    towards 1; pass explicit sizes to :func:`extract_disjoint_hstars` instead.
    """
    et = delta / (20.0 * tau)
    eb = et / (4.4 * tau)
    eps = delta / (400.0 * tau**3)
    return {
        "k1": n**et,
        "k2": n**eps,
        "center_window": (n ** (2 * et), math.inf),
        "layer_window": (n**eb, n ** (3 * eb)),
    }


# ------------------------------------------------------------ extraction


def _in_window(deg, window):
    return window is None or (window[0] <= deg <= window[1])


def extract_disjoint_hstars(g, k1, k2, max_count=None, center_window=None, layer_window=None):
    """Greedily collect vertex-disjoint ``(k1, k2)`` hierarchical stars.

    Centers are tried in order of decreasing degree (lower index first on
    ties), optionally restricted to ``center_window``.  For a center, each
    unclaimed neighbour in ``layer_window`` offers its ``ceil(k2)`` unclaimed
    neighbours of lowest degree as leaves; first-layer vertices are taken
    from the cheapest offers (smallest total leaf degree) so high-degree
    vertices stay available for later centers.  A center that cannot be
    completed releases everything it tentatively claimed.
    """
    K1, K2 = _ceil(k1), _ceil(k2)
    limit = math.inf if max_count is None else int(max_count)
    deg = g.degrees
    claimed = np.zeros(g.n, dtype=bool)
    order = np.lexsort((np.arange(g.n), -deg))
    found = []
    for c in order:
        if len(found) >= limit:
            break
        c = int(c)
        if claimed[c] or deg[c] < K1 or not _in_window(deg[c], center_window):
            continue
        claimed[c] = True
        taken = [c]
        first, second = [], []
        while len(first) < K1:
            best = None
            for u in g.neighbors(c):
                u = int(u)
                if claimed[u] or not _in_window(deg[u], layer_window):
                    continue
                cand = [int(w) for w in g.neighbors(u) if not claimed[w] and w != u]
                if len(cand) < K2:
                    continue
                cand.sort(key=lambda w: (deg[w], w))
                leaves = cand[:K2]
                cost = sum(int(deg[w]) for w in leaves)
                if best is None or (cost, u) < best[0]:
                    best = ((cost, u), u, leaves)
            if best is None:
                break
            _, u, leaves = best
            claimed[u] = True
            claimed[leaves] = True
            taken.extend([u, *leaves])
            first.append(u)
            second.append(leaves)
        if len(first) == K1:
            found.append(HierarchicalStar(c, first, second))
        else:
            claimed[taken] = False
    return found


# -------------------------------------------------------------- planting


def star_block(k1, k2):
    """Vertex count of one planted star."""
    return 1 + k1 + k1 * k2


def canonical_star(offset, k1, k2):
    """Star occupying vertices ``offset .. offset + star_block - 1``."""
    first = [offset + 1 + i for i in range(k1)]
    second = [[offset + 1 + k1 + i * k2 + j for j in range(k2)] for i in range(k1)]
    return HierarchicalStar(offset, first, second)


def plant_hstar_graph(count, k1, k2, extra_edges=(), seed=None):
    """Graph made of ``count`` disjoint ``(k1, k2)`` stars plus extra edges.

    Star ``s`` occupies the canonical block starting at ``s * star_block``;
    ``extra_edges`` use these canonical labels.  With a ``seed`` the vertex
    labels are then shuffled.  Returns ``(graph, stars)``.
    """
    k1, k2 = int(k1), int(k2)
    block = star_block(k1, k2)
    n = count * block
    stars = [canonical_star(s * block, k1, k2) for s in range(count)]
    edges = [e for hs in stars for e in hs.designated_edges]
    extra = np.asarray(list(extra_edges), dtype=np.int64).reshape(-1, 2)
    if extra.size and (extra.min() < 0 or extra.max() >= n):
        raise ValueError("extra edge endpoint out of range")
    all_edges = np.concatenate((np.asarray(edges, dtype=np.int64).reshape(-1, 2), extra))
    if seed is not None:
        perm = generator(seed, 11).permutation(n)
        all_edges = perm[all_edges]
        stars = [HierarchicalStar(perm[hs.center], perm[list(hs.first_layer)],
                                  [perm[list(r)] for r in hs.second_layer]) for hs in stars]
    return SimpleGraph.from_edges(n, all_edges), stars


def star_graph(k):
    """Center 0 with leaves ``1..k``."""
    return SimpleGraph.from_edges(k + 1, [(0, i) for i in range(1, k + 1)])


def same_star(a, b):
    """Equal center, first layer and leaf sets, ignoring order."""
    if a.center != b.center or set(a.first_layer) != set(b.first_layer):
        return False
    rows_a = {u: set(r) for u, r in zip(a.first_layer, a.second_layer)}
    rows_b = {u: set(r) for u, r in zip(b.first_layer, b.second_layer)}
    return rows_a == rows_b


def recall(planted, found):
    """Fraction of planted stars returned exactly by an extraction."""
    if not planted:
        return 1.0
    hits = sum(any(same_star(p, f) for f in found) for p in planted)
    return hits / len(planted)
