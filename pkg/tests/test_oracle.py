import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, linalg
from scipy.sparse import linalg as splinalg

from metastable_epi.dynamics import ModelParams, Variant, extinction_times
from metastable_epi.graph_core import SimpleGraph
from metastable_epi.oracle import (
    StateSpaceTooLarge,
    build_generator,
    extinction_cdf,
    mean_extinction,
)

from conftest import path_graph, within_se


def naive_generator(g, p):
    """Dense generator from the rate table, one configuration at a time."""
    sis = p.variant == Variant.SIS
    alphabet = "SI" if sis else "SIR"
    base = len(alphabet)
    configs = list(itertools.product(alphabet, repeat=g.n))
    code = lambda c: sum(alphabet.index(ch) * base**v for v, ch in enumerate(c))
    q = np.zeros((base**g.n, base**g.n))
    for c in configs:
        x = code(c)
        for v in range(g.n):
            k = sum(c[u] == "I" for u in g.neighbors(v))
            moves = []
            if c[v] == "S":
                moves.append(("I", p.lam * (min(k, 1) if p.variant == Variant.THRESHOLD_SIRS else k)))
            elif c[v] == "I":
                moves.append(("S" if sis else "R", 1.0))
            elif p.variant in (Variant.SIRS, Variant.THRESHOLD_SIRS):
                moves.append(("S", p.rho))
            for new, rate in moves:
                if rate > 0:
                    y = code(c[:v] + (new,) + c[v + 1:])
                    q[x, y] += rate
                    q[x, x] -= rate
    return q


def test_single_vertex_sirs():
    g = SimpleGraph.from_edges(1, [])
    gen = build_generator(g, ModelParams(1.0, 0.4))
    expected = np.array([[0, 0, 0], [0, -1, 1], [0.4, 0, -0.4]])
    assert np.array_equal(gen.q.toarray(), expected)
    assert gen.absorbing.tolist() == [True, False, True]


def sis_edge_q(lam):
    # index = d0 + 2 d1: SS, IS, SI, II
    return np.array([
        [0, 0, 0, 0],
        [1, -1 - lam, 0, lam],
        [1, 0, -1 - lam, lam],
        [0, 1, 1, -2],
    ], dtype=float)


def test_sis_edge_generator():
    gen = build_generator(path_graph(2), ModelParams(1.3, 0, "SIS"))
    assert gen.size == 4
    assert np.allclose(gen.q.toarray(), sis_edge_q(1.3), atol=0)
    assert gen.index("IS") == 1


def test_threshold_triangle_rate():
    tri = SimpleGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    for variant, factor in ((Variant.THRESHOLD_SIRS, 1), (Variant.SIRS, 2)):
        gen = build_generator(tri, ModelParams(0.7, 1, variant))
        x, y = gen.index("SII"), gen.index("III")
        assert gen.q[x, y] == pytest.approx(factor * 0.7)


@st.composite
def tiny_instances(draw):
    n = draw(st.integers(1, 4))
    pairs = list(itertools.combinations(range(n), 2))
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    variant = draw(st.sampled_from(list(Variant)))
    lam = draw(st.floats(0.0, 3.0))
    rho = 0.0 if variant == Variant.SIR else draw(st.floats(0.0, 3.0))
    return SimpleGraph.from_edges(n, edges), ModelParams(lam, rho, variant)


@given(inst=tiny_instances())
@settings(max_examples=120, deadline=None)
def test_generator_matches_naive(inst):
    g, p = inst
    gen = build_generator(g, p)
    dense = gen.q.toarray()
    assert np.allclose(dense, naive_generator(g, p), rtol=0, atol=1e-14)
    assert np.abs(dense.sum(axis=1)).max() <= 1e-12
    # single-vertex moves only
    rows, cols = np.nonzero(dense - np.diag(np.diag(dense)))
    assert ((gen.states[rows] != gen.states[cols]).sum(axis=1) == 1).all()
    assert np.array_equal(gen.absorbing, ~(gen.states == 1).any(axis=1))


def test_cap():
    with pytest.raises(StateSpaceTooLarge, match="cap"):
        build_generator(path_graph(8), ModelParams(1, 1))
    assert build_generator(path_graph(10), ModelParams(1, 0, "SIS")).size == 2**10
    with pytest.raises(StateSpaceTooLarge):
        build_generator(path_graph(11), ModelParams(1, 0, "SIS"))


# ------------------------------------------------------------- means


def test_mean_examples():
    one = SimpleGraph.from_edges(1, [])
    two = SimpleGraph.from_edges(2, [])
    assert mean_extinction(build_generator(one, ModelParams(1, 1)), "I") == pytest.approx(1.0, rel=1e-12)
    assert mean_extinction(build_generator(two, ModelParams(1, 1)), "II") == pytest.approx(1.5, rel=1e-12)
    for lam in (0.5, 1.0, 2.0):
        gen = build_generator(path_graph(2), ModelParams(lam, 0, "SIS"))
        assert mean_extinction(gen, "II") == pytest.approx(1.5 + lam / 2, rel=1e-12)
        assert mean_extinction(gen, "IS") == pytest.approx(1 + lam / 2, rel=1e-12)
    assert mean_extinction(build_generator(path_graph(3), ModelParams(1, 1)), "SRS") == 0.0


def test_path3_sirs_frozen():
    gen = build_generator(path_graph(3), ModelParams(1, 1))
    q = naive_generator(path_graph(3), ModelParams(1, 1))
    tr = np.flatnonzero(~gen.absorbing)
    m = np.linalg.solve(-q[np.ix_(tr, tr)], np.ones(tr.size))
    ref = m[np.searchsorted(tr, gen.index("III"))]
    assert mean_extinction(gen, "III") == pytest.approx(ref, rel=1e-12)
    assert mean_extinction(gen, "III") == pytest.approx(2.175796524676646, rel=1e-12)


def test_iterative_solve_above_direct_limit():
    g = path_graph(8)
    p = ModelParams(1, 1)
    gen = build_generator(g, p, cap=8)
    tr = np.flatnonzero(~gen.absorbing)
    a = -gen.q[tr][:, tr].tocsc()
    direct = splinalg.spsolve(a, np.ones(tr.size), permc_spec="NATURAL")
    x = gen.index("I" * 8)
    assert mean_extinction(gen, "I" * 8) == pytest.approx(direct[np.searchsorted(tr, x)], rel=1e-8)


# --------------------------------------------------------------- CDF


def test_cdf_closed_forms():
    gen = build_generator(SimpleGraph.from_edges(1, []), ModelParams(1, 1))
    assert extinction_cdf(gen, "I", math.log(2)) == pytest.approx(0.5, abs=1e-8)
    assert extinction_cdf(gen, "I", 0.0) == 0.0
    assert extinction_cdf(gen, "S", 0.0) == 1.0
    with pytest.raises(ValueError):
        extinction_cdf(gen, "I", -1.0)


def test_cdf_sis_edge_against_expm():
    q = sis_edge_q(1.0)
    pt = linalg.expm(q * 2.0)
    ref = pt[3, 0]  # from II into SS
    gen = build_generator(path_graph(2), ModelParams(1, 0, "SIS"))
    assert extinction_cdf(gen, "II", 2.0) == pytest.approx(ref, abs=1e-6)


def test_cdf_monotone_and_tends_to_one():
    gen = build_generator(path_graph(3), ModelParams(1, 1))
    grid = [0.0, 0.5, 1, 2, 4, 8, 16, 32, 64]
    vals = [extinction_cdf(gen, "III", t) for t in grid]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 1 - 1e-6


@pytest.mark.parametrize("variant", [Variant.SIRS, Variant.SIS])
def test_mean_equals_integrated_survival(variant):
    p = ModelParams(1, 0 if variant == Variant.SIS else 1, variant)
    gen = build_generator(path_graph(3), p)
    mean = mean_extinction(gen, "III")
    # exponential tail beyond t_max is below 1e-9 of the mean
    integral, _ = integrate.quad(lambda t: 1 - extinction_cdf(gen, "III", t, tol=1e-12), 0, 60,
                                 limit=200, epsabs=1e-10)
    assert integral == pytest.approx(mean, rel=1e-4)


# ----------------------------------------------- simulator vs oracle


@pytest.mark.parametrize("variant", list(Variant))
@pytest.mark.parametrize("graph", ["path3", "star4", "triangle"])
def test_simulator_matches_oracle(variant, graph):
    g = {
        "path3": path_graph(3),
        "star4": SimpleGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)]),
        "triangle": SimpleGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)]),
    }[graph]
    p = ModelParams(1.2, 0.0 if variant == Variant.SIR else 0.8, variant)
    init = "I" + "S" * (g.n - 1) if variant != Variant.SIS else "I" * g.n
    target = mean_extinction(build_generator(g, p), init)
    t, c, _ = extinction_times(g, p, init, 1e6, range(20_000))
    assert not c.any()
    ok, mean, se = within_se(t, target)
    assert ok, (target, mean, se)
