import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from metastable_epi.graph_core import (
    LowerBound,
    Multigraph,
    SimpleGraph,
    check_degree_event,
    degree_pmf,
    diameter,
    envelope_constants,
    mean_degree,
    normalizer,
    pair_half_edges,
    sample_degree_sequence,
    simple_projection,
    DegreeSequence,
)

from conftest import path_graph


def series_sum(power, start=3, stop=10**7):
    """``sum_{j >= start} j**-power`` by direct summation plus the integral
    tail bracket ``[1/((p-1)(N+1)**(p-1)), 1/((p-1)N**(p-1))]`` midpoint."""
    j = np.arange(start, stop + 1, dtype=np.float64)
    head = float(np.sum(j**-power))
    lo = 1.0 / ((power - 1) * (stop + 1) ** (power - 1))
    hi = 1.0 / ((power - 1) * stop ** (power - 1))
    return head + 0.5 * (lo + hi), 0.5 * (hi - lo)


# ------------------------------------------------------------- degrees


def test_normalizer_matches_series():
    total, err = series_sum(3.0)
    assert err < 1e-14
    assert 1.0 / total == pytest.approx(12.9774, abs=5e-5)
    assert normalizer(3.0) == pytest.approx(1.0 / total, rel=1e-6)


def test_mean_degree_matches_series():
    s3, _ = series_sum(3.0)
    s2, err = series_sum(2.0)
    assert err < 1e-7
    mu = s2 / s3
    assert mu == pytest.approx(5.1252263, abs=1e-6)
    assert mean_degree(3.0) == pytest.approx(mu, rel=1e-4)


def test_rejects_tau_at_most_two():
    with pytest.raises(ValueError):
        sample_degree_sequence(10, 2.0, 0)
    with pytest.raises(ValueError):
        normalizer(1.5)


def test_single_vertex_gets_even_degree():
    for seed in range(20):
        d = sample_degree_sequence(1, 3.0, seed).degrees
        assert d.size == 1 and d[0] % 2 == 0 and d[0] >= 4


def test_deterministic_given_seed():
    a = sample_degree_sequence(1000, 2.7, 42).degrees
    b = sample_degree_sequence(1000, 2.7, 42).degrees
    c = sample_degree_sequence(1000, 2.7, 43).degrees
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


@given(n=st.integers(1, 300), tau=st.floats(2.05, 6.0), seed=st.integers(0, 2**64 - 1))
@settings(max_examples=60, deadline=None)
def test_degree_sequence_invariants(n, tau, seed):
    d = sample_degree_sequence(n, tau, seed).degrees
    assert d.size == n
    assert d.sum() % 2 == 0
    assert (d >= 3).all()


def test_ratio_three_to_four():
    d = sample_degree_sequence(10**6, 3.0, 7).degrees
    n3, n4 = int((d == 3).sum()), int((d == 4).sum())
    ratio = n3 / n4
    # delta-method standard error of a ratio of multinomial counts
    se = ratio * math.sqrt(1 / n3 + 1 / n4)
    assert abs(ratio - 64 / 27) <= 3 * se


@pytest.mark.parametrize("tau", [2.5, 3.0, 3.5])
def test_chi_square_against_power_law(tau):
    d = sample_degree_sequence(10**6, tau, 11).degrees
    ks = np.arange(3, 51)
    observed = np.array([(d == k).sum() for k in ks] + [(d > 50).sum()])
    p = degree_pmf(ks, tau)
    expected = np.append(p, 1 - p.sum()) * d.size
    assert stats.chisquare(observed, expected).pvalue > 1e-3


class _FixedUniforms:
    def __init__(self, u):
        self.u = np.asarray(u, dtype=np.float64)

    def random(self, n):
        return self.u[:n]


def test_tail_beyond_table():
    from metastable_epi.graph_core import TABLE_MAX, _draw_degrees, _survival_table

    tau = 2.5
    c = normalizer(tau)
    sf = _survival_table(tau)
    # just below the last tabulated survival value lands right past the table
    edge = _draw_degrees(_FixedUniforms([1 - sf[-1] * 0.999999]), 1, tau)[0]
    assert TABLE_MAX < edge <= TABLE_MAX + 5
    # far tail: P(D >= k) ~ C k**(1 - tau) / (tau - 1)
    k = 10**8
    s = c * k ** (1 - tau) / (tau - 1)
    far = _draw_degrees(_FixedUniforms([1 - s]), 1, tau)[0]
    assert far == pytest.approx(k, rel=1e-3)


# ------------------------------------------------------------- pairing


def matchings(items):
    """All perfect matchings of a list (brute force)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        for m in matchings(rest[:i] + rest[i + 1:]):
            yield [(first, other)] + m


def test_single_edge():
    mg = pair_half_edges([1, 1], seed=5)
    assert mg.edges.tolist() == [[0, 1]] or mg.edges.tolist() == [[1, 0]]


def test_four_stubs_uniform():
    all_m = list(matchings([0, 1, 2, 3]))
    assert len(all_m) == 3
    target = 1 / len(all_m)  # {0-1, 2-3} is one of three
    hits = 0
    draws = 100_000
    for seed in range(draws):
        e = np.sort(pair_half_edges([1, 1, 1, 1], seed).edges, axis=1)
        hits += sorted(map(tuple, e.tolist())) == [(0, 1), (2, 3)]
    se = math.sqrt(target * (1 - target) / draws)
    assert abs(hits / draws - target) <= 3 * se


def test_pair_count():
    for seed in range(10):
        assert pair_half_edges([3, 3], seed).m == 3


def test_odd_sum_rejected():
    with pytest.raises(ValueError, match="odd"):
        pair_half_edges([1, 2], 0)


@given(degs=st.lists(st.integers(0, 7), min_size=1, max_size=25), seed=st.integers(0, 2**32))
@settings(max_examples=80, deadline=None)
def test_every_half_edge_used_once(degs, seed):
    if sum(degs) % 2:
        degs[0] += 1
    mg = pair_half_edges(degs, seed)
    flat = np.sort(mg.pairing.ravel())
    assert np.array_equal(flat, np.arange(sum(degs)))
    assert mg.m == sum(degs) // 2
    assert np.array_equal(mg.degrees, np.asarray(degs))
    # (vertex, slot) identifies each half-edge uniquely
    assert len(set(zip(mg.stub_vertex.tolist(), mg.stub_slot.tolist()))) == sum(degs)


# ---------------------------------------------------------- projection


def test_projection_collapses_loops_and_repeats():
    mg = Multigraph.from_edges(3, [(1, 1), (0, 2), (2, 0), (0, 2)])
    assert simple_projection(mg).edge_set() == {(0, 2)}
    assert mg.multiplicities() == {(1, 1): 1, (0, 2): 3}


def test_projection_identity_on_simple():
    edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
    g = simple_projection(Multigraph.from_edges(4, edges))
    assert g.edge_set() == set(edges)


def test_projection_only_loops():
    g = simple_projection(Multigraph.from_edges(2, [(0, 0), (1, 1), (1, 1)]))
    assert g.m == 0


@given(seed=st.integers(0, 10**6), n=st.integers(1, 60))
@settings(max_examples=40, deadline=None)
def test_projection_idempotent(seed, n):
    _, mg, g = (lambda d: (d, pair_half_edges(d, seed), None))(sample_degree_sequence(n, 2.5, seed))
    g = simple_projection(mg)
    again = simple_projection(Multigraph.from_edges(g.n, g.edges))
    assert again == g
    assert (g.edges[:, 0] < g.edges[:, 1]).all()
    for v in range(g.n):
        nb = g.neighbors(v)
        assert (np.diff(nb) > 0).all()


# ------------------------------------------------------------ diameter


def floyd_warshall(n, edges):
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in edges:
        d[u, v] = d[v, u] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d.max()


def test_diameter_examples():
    assert diameter(path_graph(4)) == 3
    star = SimpleGraph.from_edges(6, [(0, i) for i in range(1, 6)])
    assert diameter(star) == 2
    assert diameter(SimpleGraph.from_edges(4, [(0, 1), (2, 3)])) == math.inf


@given(n=st.integers(2, 8), data=st.data())
@settings(max_examples=300, deadline=None)
def test_diameter_matches_floyd_warshall(n, data):
    pairs = list(itertools.combinations(range(n), 2))
    chosen = data.draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    g = SimpleGraph.from_edges(n, chosen)
    assert diameter(g) == floyd_warshall(n, chosen)


def test_large_graph_gets_lower_bound():
    g = path_graph(50)
    d = diameter(g, exact_max_n=10)
    assert isinstance(d, LowerBound) and d.lower_bound
    assert d <= 49
    assert diameter(g) == 49


# ------------------------------------------------------- degree event


def test_envelope_constants():
    c = normalizer(3.0)
    c1, c2 = envelope_constants(3.0)
    assert c1 == pytest.approx(math.sqrt(c / 2 / 5))
    assert c2 == pytest.approx(math.sqrt(c / 2 * 8))


def test_constant_sequence_flags_top_rank():
    deg = DegreeSequence(np.full(100, 3), tau=3.0)
    rep = check_degree_event(deg, 0.1)
    c1, _ = envelope_constants(3.0)
    assert c1 * 100**0.5 > 3
    assert 1 in rep.violating_indices
    assert not rep.order_stats_ok
    assert rep.mu == pytest.approx(5.1252263, abs=1e-6)


def test_epsilon_range():
    deg = sample_degree_sequence(100, 3.0, 0)
    with pytest.raises(ValueError):
        check_degree_event(deg, 0.2)  # 1/(2*3-1) = 0.2 is excluded
    with pytest.raises(ValueError):
        check_degree_event(deg, 0.0)


def test_order_stats_window_semantics():
    deg = sample_degree_sequence(5000, 3.0, 1)
    rep = check_degree_event(deg, 0.1)
    assert rep.window_start == math.ceil(5000**0.1)
    assert rep.order_stats_ok == all(i < rep.window_start for i in rep.violating_indices)
    assert rep.sum_ok == (abs(deg.total - 5000 * rep.mu) <= 2500 * rep.mu)


def test_degree_event_custom_constants():
    deg = sample_degree_sequence(2000, 3.0, 2)
    loose = check_degree_event(deg, 0.1, lower=50.0, upper=80.0)
    strict = check_degree_event(deg, 0.1)
    assert len(loose.violating_indices) <= len(strict.violating_indices)
