"""Declarative survival experiments and the oracle validation suite.

An experiment is a JSON document; see :class:`ExperimentConfig`.  Each grid
point builds one instance, runs ``replicates`` independent simulations and
writes::

    <output_dir>/<kind>_<grid value>_replicates.csv   replicate,extinction_time,censored
    <output_dir>/<kind>_<grid value>_survival.json    SurvivalReport
    <output_dir>/summary.json                         config, version, all points, gates
    <output_dir>/plot.csv                             grid, log grid, median, log median, CI

Replicate ``r`` at grid index ``g`` is seeded by hashing
``(base_seed, g, r)``, so outputs do not depend on the worker count.
"""
import csv
import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    MarkBudgetExceeded,
    ModelParams,
    Variant,
    all_infected,
    check_trajectory,
    extinction_time,
    extinction_times,
    simulate_event_driven,
    simulate_harris,
    single_infected,
)
from .dynamics.harris import MAX_MARKS, expected_marks
from .graph_core import SimpleGraph, generate_graph
from .io import write_replicates
from .observables import summarize_survival
from .oracle import build_generator, mean_extinction
from .rng import MASK64, derive_key, generator
from .structures import plant_hstar_graph, star_graph

log = logging.getLogger(__name__)

KINDS = ("star_survival", "hstar_survival", "powerlaw_survival", "validation", "degree_climb")
WORKERS_ENV = "METASTABLE_EPI_WORKERS"

#: Default horizons: star-type experiments and power-law graphs.
STAR_HORIZON = 1e6
POWERLAW_HORIZON = 1e4

#: Events logged for the per-point invariant gate.
GATE_MAX_EVENTS = 200_000

_GRAPH_TAG = 1 << 40
_INIT_TAG = (1 << 40) + 1


@dataclasses.dataclass
class ExperimentConfig:
    """Everything needed to rerun an experiment bit-for-bit."""

    kind: str
    model: ModelParams
    grid: list = dataclasses.field(default_factory=list)
    replicates: int = 200
    horizon: float = None
    base_seed: int = 0
    output_dir: str = "results"
    tau: float = None
    delta: float = None
    init: str = "all-I"
    engine: str = "event"
    hstar_count: int = 1
    bootstrap_reps: int = 1000
    climb_degree: int = None
    validation_cases: list = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if isinstance(self.model, dict):
            self.model = ModelParams(self.model.get("lambda", self.model.get("lam")),
                                     self.model.get("rho", 0.0), self.model.get("variant", "SIRS"))
        if self.horizon is None:
            self.horizon = POWERLAW_HORIZON if self.kind in ("powerlaw_survival", "degree_climb") else STAR_HORIZON
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.kind != "validation" and not self.grid:
            raise ValueError("grid must be non-empty")
        if self.kind in ("powerlaw_survival", "degree_climb") and self.tau is None:
            raise ValueError(f"{self.kind} needs tau")
        if self.engine not in ("event", "harris"):
            raise ValueError("engine must be 'event' or 'harris'")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "lambda" in d or "rho" in d or "variant" in d:
            d["model"] = {"lambda": d.pop("lambda", None), "rho": d.pop("rho", 0.0),
                          "variant": d.pop("variant", "SIRS"), **d.get("model", {})}
        unknown = set(d) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path, overrides=()):
        d = json.loads(Path(path).read_text())
        return cls.from_dict(apply_overrides(d, overrides))

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["model"] = self.model.to_dict()
        return d


def apply_overrides(d, overrides):
    """Apply ``key=value`` strings; dotted keys reach into nested objects and
    values are parsed as JSON when possible."""
    d = json.loads(json.dumps(d))
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"override {item!r} is not key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        target = d
        *path, last = key.strip().split(".")
        for p in path:
            target = target.setdefault(p, {})
        target[last] = value
    return d


def default_workers():
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def replicate_seeds(base_seed, grid_index, replicates):
    return [derive_key(base_seed, grid_index, r) & MASK64 for r in range(replicates)]


# ------------------------------------------------------------ instances


def build_instance(cfg, grid_index, value):
    """``(graph, initial configuration, description)`` for one grid point."""
    if cfg.kind == "star_survival":
        g = star_graph(int(value))
        desc = {"k": int(value), "n": g.n}
    elif cfg.kind == "hstar_survival":
        g, stars = plant_hstar_graph(cfg.hstar_count, int(value), int(value))
        desc = {"k1": int(value), "k2": int(value), "count": cfg.hstar_count, "n": g.n}
    else:
        graph_seed = derive_key(cfg.base_seed, grid_index, _GRAPH_TAG) & MASK64
        _, mg, g = generate_graph(int(value), cfg.tau, graph_seed)
        desc = {"n": g.n, "m": g.m, "multigraph_pairs": mg.m, "graph_seed": graph_seed, "tau": cfg.tau}
    return g, initial_configuration(cfg, grid_index, g), desc


def initial_configuration(cfg, grid_index, g):
    spec = cfg.init.strip().lower()
    if spec in ("all-i", "all"):
        return all_infected(g.n)
    if spec == "uniform-single":
        v = int(generator(cfg.base_seed, grid_index, _INIT_TAG).integers(g.n))
        return single_infected(g.n, v)
    from .io import parse_init
    return parse_init(cfg.init, g.n)


# ------------------------------------------------------------ replicates


def _run_chunk(args):
    g, params, init, horizon, seeds, engine = args
    if engine == "harris":
        out_t, out_c = [], []
        for s in seeds:
            traj = simulate_harris(g, params, init, horizon, s)
            t = extinction_time(traj)
            out_t.append(float(t))
            out_c.append(traj.censored)
        return np.array(out_t), np.array(out_c, dtype=bool)
    t, c, _ = extinction_times(g, params, init, horizon, seeds)
    return t, c


def run_replicates(g, params, init, horizon, seeds, workers=1, engine="event"):
    """Extinction times for ``seeds`` in seed order, optionally in parallel."""
    if engine == "harris" and expected_marks(g, params, horizon) > MAX_MARKS:
        log.warning("mark budget exceeded for the Harris engine; falling back to the event-driven engine")
        engine = "event"
    seeds = list(seeds)
    if workers <= 1 or len(seeds) < 2:
        return _run_chunk((g, params, init, horizon, seeds, engine))
    chunks = np.array_split(np.arange(len(seeds)), min(len(seeds), 4 * workers))
    jobs = [(g, params, init, horizon, [seeds[i] for i in idx], engine) for idx in chunks if idx.size]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, jobs))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def trajectory_gate(g, params, init, horizon, seed):
    """Invariant violations on one fully logged run (empty list when clean)."""
    traj = simulate_event_driven(g, params, init, horizon, seed, max_events=GATE_MAX_EVENTS)
    return check_trajectory(g, params, traj)


# ---------------------------------------------------------------- runner


def _grid_label(value):
    return str(int(value)) if float(value).is_integer() else str(value)


def run_experiment(cfg, workers=None):
    """Run every grid point, write the per-point files and the report.

    Returns the summary dictionary (also written to ``summary.json``).
    """
    workers = default_workers() if workers is None else workers
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.kind == "validation":
        return emit_validation(run_validation(cfg, workers), cfg)
    if cfg.kind == "degree_climb":
        return emit_report(run_degree_climb(cfg, workers), cfg)
    results = []
    for gi, value in enumerate(cfg.grid):
        g, init, desc = build_instance(cfg, gi, value)
        seeds = replicate_seeds(cfg.base_seed, gi, cfg.replicates)
        times, censored = run_replicates(g, cfg.model, init, cfg.horizon, seeds, workers, cfg.engine)
        label = _grid_label(value)
        write_replicates(out / f"{cfg.kind}_{label}_replicates.csv", times, censored)
        report = summarize_survival(times, cfg.bootstrap_reps, derive_key(cfg.base_seed, gi) & MASK64,
                                    censored=censored, horizon=cfg.horizon,
                                    params={**cfg.model.to_dict(), **desc, "grid_value": value})
        (out / f"{cfg.kind}_{label}_survival.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        gate = trajectory_gate(g, cfg.model, init, cfg.horizon, seeds[0])
        results.append({"grid_value": value, "instance": desc, "survival": report, "gate_violations": gate})
        log.info("%s %s: median %.4g, censored %.1f%%", cfg.kind, label, report.median, 100 * report.censor_fraction)
    return emit_report(results, cfg)


def emit_report(results, cfg):
    """Write ``summary.json`` and ``plot.csv``; return the summary."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = sorted(results, key=lambda r: float(r["grid_value"]))
    points = []
    for r in results:
        point = {k: v for k, v in r.items() if k != "survival"}
        if "survival" in r:
            point["survival"] = r["survival"].to_dict()
        points.append(point)
    gates_ok = all(not p.get("gate_violations") for p in points)
    summary = {
        "version": __version__,
        "config": cfg.to_dict(),
        "no_data": not points,
        "points": points,
        "gates_passed": gates_ok,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    with open(out / "plot.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["grid_value", "log_grid_value", "median", "log_median", "ci_low", "ci_high", "censor_fraction"])
        for r in results:
            if "survival" not in r:
                continue
            s = r["survival"]
            x = float(r["grid_value"])
            w.writerow([repr(x), repr(math.log(x)), repr(s.median), repr(math.log(s.median)) if s.median > 0 else "",
                        repr(s.ci_low), repr(s.ci_high), repr(s.censor_fraction)])
    return summary


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"{type(o).__name__} is not JSON serialisable")


# ------------------------------------------------------------ validation


def _path(n):
    return SimpleGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def default_validation_cases():
    """Oracle-match cases on graphs with at most five vertices, every variant."""
    edge = _path(2)
    tri = SimpleGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    star4 = SimpleGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    return [
        ("isolated vertex SIRS", SimpleGraph.from_edges(1, []), ModelParams(1, 1), "I"),
        ("two isolated SIRS", SimpleGraph.from_edges(2, []), ModelParams(1, 1), "II"),
        ("edge SIS lambda=1", edge, ModelParams(1, 0, Variant.SIS), "II"),
        ("path3 SIRS", _path(3), ModelParams(1, 1), "III"),
        ("path3 threshold-SIRS", _path(3), ModelParams(1, 1, Variant.THRESHOLD_SIRS), "III"),
        ("triangle SIR", tri, ModelParams(1.5, 0, Variant.SIR), "ISS"),
        ("triangle threshold-SIRS", tri, ModelParams(2, 0.5, Variant.THRESHOLD_SIRS), "IIS"),
        ("star4 SIS", star4, ModelParams(1, 0, Variant.SIS), "IIII"),
        ("path5 SIRS", _path(5), ModelParams(1, 1), "IIIII"),
        ("path5 SIS", _path(5), ModelParams(0.8, 0, Variant.SIS), "ISISI"),
    ]


def run_validation(cfg, workers=1):
    """Compare simulated mean extinction times with the exact oracle.

    A case passes when the empirical mean over ``cfg.replicates`` runs is
    within 3 standard errors of the linear-solve value and no run is
    censored.
    """
    cases = default_validation_cases()
    if cfg.validation_cases:
        cases = [c for c in cases if c[0] in set(cfg.validation_cases)]
    rows = []
    for ci, (name, g, params, init) in enumerate(cases):
        exact = mean_extinction(build_generator(g, params), init)
        seeds = replicate_seeds(cfg.base_seed, ci, cfg.replicates)
        times, censored = run_replicates(g, params, init, cfg.horizon, seeds, workers)
        mean = float(times.mean())
        se = float(times.std(ddof=1) / math.sqrt(times.size)) if times.size > 1 else math.inf
        ok = bool(abs(mean - exact) <= 3 * se and not censored.any())
        gate = trajectory_gate(g, params, init, cfg.horizon, seeds[0])
        rows.append({"case": name, "variant": params.variant.name, "n": g.n, "oracle_mean": exact,
                     "empirical_mean": mean, "standard_error": se, "z": (mean - exact) / se if se else 0.0,
                     "censored": int(censored.sum()), "passed": ok and not gate, "gate_violations": gate})
        log.info("%-26s oracle %.6f  sim %.6f +- %.6f  %s", name, exact, mean, se, "PASS" if rows[-1]["passed"] else "FAIL")
    return rows


def emit_validation(rows, cfg):
    out = Path(cfg.output_dir)
    summary = {"version": __version__, "config": cfg.to_dict(), "no_data": not rows,
               "cases": rows, "gates_passed": all(r["passed"] for r in rows)}
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
    with open(out / "validation.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "variant", "oracle_mean", "empirical_mean", "standard_error", "passed"])
        for r in rows:
            w.writerow([r["case"], r["variant"], repr(r["oracle_mean"]), repr(r["empirical_mean"]),
                        repr(r["standard_error"]), int(r["passed"])])
    return summary


# ----------------------------------------------------------- degree climb


def run_degree_climb(cfg, workers=1):
    """Infect one uniform vertex; record whether infection reaches a vertex of
    degree at least ``climb_degree`` before extinction or the horizon.

    This only measures the event; it makes no claim about the asymptotic
    constants of the single-seed survival argument.
    """
    results = []
    out = Path(cfg.output_dir)
    for gi, value in enumerate(cfg.grid):
        graph_seed = derive_key(cfg.base_seed, gi, _GRAPH_TAG) & MASK64
        _, _, g = generate_graph(int(value), cfg.tau, graph_seed)
        threshold = cfg.climb_degree or max(3, int(round(g.n ** 0.25)))
        deg = g.degrees
        seeds = replicate_seeds(cfg.base_seed, gi, cfg.replicates)
        reached = np.zeros(len(seeds), dtype=bool)
        times = np.zeros(len(seeds))
        censored = np.zeros(len(seeds), dtype=bool)
        for r, s in enumerate(seeds):
            v0 = int(generator(s, _INIT_TAG).integers(g.n))
            traj = simulate_event_driven(g, cfg.model, single_infected(g.n, v0), cfg.horizon, s,
                                         max_events=GATE_MAX_EVENTS)
            hit = deg[v0] >= threshold or bool(((traj.new == 1) & (deg[traj.vertices] >= threshold)).any())
            reached[r] = hit
            t = extinction_time(traj)
            times[r] = float(t)
            censored[r] = traj.censored
        label = _grid_label(value)
        write_replicates(out / f"{cfg.kind}_{label}_replicates.csv", times, censored)
        p = float(reached.mean())
        results.append({"grid_value": value, "instance": {"n": g.n, "m": g.m, "graph_seed": graph_seed},
                        "climb_degree": threshold, "reach_probability": p,
                        "reach_standard_error": math.sqrt(p * (1 - p) / reached.size),
                        "gate_violations": []})
    return results
