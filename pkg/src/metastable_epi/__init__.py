"""SIRS-family epidemics on power-law configuration-model graphs.

Graph generation and diagnostics live in :mod:`~metastable_epi.graph_core`,
hierarchical stars in :mod:`~metastable_epi.structures`, the two simulation
engines in :mod:`~metastable_epi.dynamics`, exact small-graph analysis in
:mod:`~metastable_epi.oracle`, trajectory summaries in
:mod:`~metastable_epi.observables` and the experiment runner in
:mod:`~metastable_epi.experiments`.
"""
__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    I,
    R,
    S,
    Censored,
    ModelParams,
    Trajectory,
    Variant,
    all_infected,
    build_harris_stream,
    check_trajectory,
    evolve_harris,
    extinction_time,
    extinction_times,
    simulate_event_driven,
    simulate_harris,
    single_infected,
)
from .graph_core import (  # noqa: E402
    DegreeSequence,
    Multigraph,
    SimpleGraph,
    check_degree_event,
    degree_pmf,
    diameter,
    generate_graph,
    mean_degree,
    normalizer,
    pair_half_edges,
    sample_degree_sequence,
    simple_projection,
)
from .observables import EpochSchedule, count_series, lit_count_series, summarize_survival  # noqa: E402
from .oracle import build_generator, extinction_cdf, mean_extinction  # noqa: E402
from .structures import (  # noqa: E402
    HierarchicalStar,
    exponent_ladder,
    extract_disjoint_hstars,
    is_hs_lit,
    is_lit,
    plant_hstar_graph,
)
