import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metastable_epi.dynamics import (
    Censored,
    HarrisStream,
    I,
    ModelParams,
    all_infected,
    evolve_harris,
    simulate_event_driven,
)
from metastable_epi.graph_core import SimpleGraph, generate_graph
from metastable_epi.observables import (
    EpochSchedule,
    configurations_at,
    count_series,
    infected_series,
    lit_count_series,
    summarize_survival,
)
from metastable_epi.rng import generator
from metastable_epi.structures import plant_hstar_graph


# ------------------------------------------------------------ counts


def test_all_susceptible_constant():
    tr = simulate_event_driven(SimpleGraph.from_edges(4, [(0, 1)]), ModelParams(1, 1), "SSSS", 5.0, 0)
    times, counts = count_series(tr)
    assert times.tolist() == [0.0] and counts.tolist() == [[4, 0, 0]]


def test_isolated_vertex_counts():
    g = SimpleGraph.from_edges(1, [])
    p = ModelParams(1, 1)
    tr = evolve_harris(g, p, "I", HarrisStream.from_marks(g, p, 10.0, rec={0: [0.5]}, sus={0: [1.5]}))
    times, counts = count_series(tr)
    assert times.tolist() == [0.0, 0.5, 1.5]
    assert counts.tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


@given(seed=st.integers(0, 2**40), lam=st.floats(0.2, 3))
@settings(max_examples=30, deadline=None)
def test_count_conservation(seed, lam):
    _, _, g = generate_graph(60, 2.5, seed % 1000)
    tr = simulate_event_driven(g, ModelParams(lam, 1), all_infected(g.n), 10.0, seed)
    _, counts = count_series(tr)
    assert (counts.sum(axis=1) == g.n).all()
    assert (counts[-1, 1] == 0) == (not tr.censored)


def test_configurations_right_continuous():
    g = SimpleGraph.from_edges(1, [])
    p = ModelParams(1, 1)
    tr = evolve_harris(g, p, "I", HarrisStream.from_marks(g, p, 10.0, rec={0: [0.5]}, sus={0: [1.5]}))
    cfgs = configurations_at(tr, [0.0, 0.5, 1.0, 1.5, 9.0])
    assert cfgs[:, 0].tolist() == [1, 2, 2, 0, 0]
    assert infected_series(tr, [0.0, 0.49, 0.5]).tolist() == [1, 1, 0]
    with pytest.raises(ValueError):
        configurations_at(tr, [1.0, 0.5])


# ------------------------------------------------------------ epochs


def test_epoch_schedule():
    s = EpochSchedule.from_ladder(10**6, 0.01, 4)
    spacing = 3 * (10**6) ** 0.01
    assert s.times[0] == 0
    assert np.allclose(np.diff(s.times), spacing)
    assert s.spacing == pytest.approx(spacing)
    with pytest.raises(ValueError):
        EpochSchedule([1.0, 2.0])


def test_lit_count_all_infected_start():
    g, (hs,) = plant_hstar_graph(1, 3, 2)
    tr = simulate_event_driven(g, ModelParams(1, 1), all_infected(g.n), 50.0, 1)
    w = lit_count_series(tr, hs, 2, EpochSchedule.uniform(0.5, 6))
    assert w[0] == 3
    assert ((w >= 0) & (w <= 3)).all()


def test_lit_count_nothing_infected():
    g, (hs,) = plant_hstar_graph(1, 2, 2)
    tr = simulate_event_driven(g, ModelParams(1, 1), "S" * 7, 50.0, 1)
    assert lit_count_series(tr, hs, 1, EpochSchedule.uniform(1.0, 5)).tolist() == [0] * 6


def test_lit_count_one_vertex_stays_infected():
    # (2,2)-star: center 0, first layer 1, 2; vertex 1 never gets a rec mark
    g, (hs,) = plant_hstar_graph(1, 2, 2)
    p = ModelParams(1, 1)
    stream = HarrisStream.from_marks(g, p, 10.0, rec={0: [0.1], 2: [0.2], 3: [0.3], 4: [0.4]})
    tr = evolve_harris(g, p, "IIISSSS", stream)
    assert tr.censored
    w = lit_count_series(tr, hs, 2, EpochSchedule.uniform(2.0, 5))
    assert w.tolist() == [2, 1, 1, 1, 1, 1]


def test_lit_count_beyond_censoring_horizon():
    g, (hs,) = plant_hstar_graph(1, 2, 2)
    tr = simulate_event_driven(g, ModelParams(1, 0, "SIS"), all_infected(g.n), 1.0, 0, max_events=3)
    with pytest.raises(ValueError, match="horizon"):
        lit_count_series(tr, hs, 1, EpochSchedule.uniform(1.0, 5))


def test_lit_count_after_extinction_is_zero():
    g, (hs,) = plant_hstar_graph(1, 2, 2)
    tr = simulate_event_driven(g, ModelParams(0.1, 1), all_infected(g.n), 1e6, 2)
    assert not tr.censored
    w = lit_count_series(tr, hs, 1, EpochSchedule.uniform(tr.times[-1] + 1, 3))
    assert w[1:].tolist() == [0, 0, 0]


# ---------------------------------------------------------- survival


def test_summary_constant_samples():
    rep = summarize_survival([1.0] * 20, bootstrap_reps=200)
    assert rep.median == 1.0 and (rep.ci_low, rep.ci_high) == (1.0, 1.0)
    assert rep.censor_fraction == 0.0


def test_summary_median_of_three():
    assert summarize_survival([1, 2, 3]).median == 2


def test_exponential_median():
    x = generator(5).exponential(size=10**5)
    rep = summarize_survival(x, bootstrap_reps=200)
    # asymptotic SE of the sample median: 1 / (2 f(m) sqrt(N)), f(ln 2) = 1/2
    se = 1 / math.sqrt(x.size)
    assert abs(rep.median - math.log(2)) <= 3 * se
    assert rep.ci_low <= rep.median <= rep.ci_high


def test_censored_samples():
    rep = summarize_survival([1.0, 2.0, Censored(100.0)], bootstrap_reps=100)
    assert rep.censor_fraction == pytest.approx(1 / 3)
    assert rep.median == 2.0 and not rep.median_lower_bound
    assert rep.mean_uncensored == 1.5
    rep = summarize_survival([5.0, 100.0, 100.0], censored=[False, True, True], horizon=100.0)
    assert rep.median_lower_bound and rep.median == 100.0
    assert rep.to_dict()["median_lower_bound"] is True


def test_all_censored():
    rep = summarize_survival([Censored(50.0)] * 4, horizon=50.0)
    assert rep.censor_fraction == 1.0
    assert rep.median == 50.0 and rep.median_lower_bound
    assert rep.to_dict()["mean_uncensored"] is None


def test_empty_rejected():
    with pytest.raises(ValueError):
        summarize_survival([])


def test_bootstrap_deterministic():
    x = generator(1).exponential(size=500)
    a = summarize_survival(x, seed=3)
    b = summarize_survival(x, seed=3)
    assert (a.ci_low, a.ci_high) == (b.ci_low, b.ci_high)


@given(xs=st.lists(st.floats(0, 1e6), min_size=1, max_size=50), seed=st.integers(0, 1000))
@settings(max_examples=60, deadline=None)
def test_median_permutation_invariant(xs, seed):
    perm = generator(seed).permutation(len(xs))
    a = summarize_survival(xs, bootstrap_reps=0)
    b = summarize_survival([xs[i] for i in perm], bootstrap_reps=0)
    assert a.median == b.median
    assert 0 <= a.censor_fraction <= 1
