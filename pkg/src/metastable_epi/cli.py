"""Command-line entry point ``metastable-epi``."""
import argparse
import json
import logging
import math
import sys

from . import __version__
from .dynamics import (
    ModelParams,
    build_harris_stream,
    check_trajectory,
    evolve_harris,
    extinction_time,
    simulate_event_driven,
)
from .dynamics.harris import MarkBudgetExceeded
from .experiments import ExperimentConfig, run_experiment
from .graph_core import diameter, generate_graph
from .io import parse_init, read_graph, write_graph, write_trace
from .oracle import build_generator, extinction_cdf, mean_extinction
from .structures import extract_disjoint_hstars


def _window(lo, hi):
    if lo is None and hi is None:
        return None
    return (-math.inf if lo is None else lo, math.inf if hi is None else hi)


def cmd_generate_graph(args):
    deg, mg, g = generate_graph(args.n, args.tau, args.seed)
    meta = {"n": args.n, "tau": args.tau, "seed": args.seed, "degrees": deg.degrees.tolist(),
            "multigraph_pairs": mg.m, "simple_edges": g.m, "version": __version__}
    write_graph(args.out, g, meta)
    info = {"out": args.out, "n": g.n, "m": g.m, "multigraph_pairs": mg.m}
    if args.diameter:
        d = diameter(g)
        info["diameter"] = None if d == math.inf else int(d)
        info["diameter_lower_bound"] = bool(getattr(d, "lower_bound", False))
    print(json.dumps(info))
    return 0


def cmd_extract_hstars(args):
    g = read_graph(args.graph)
    stars = extract_disjoint_hstars(g, args.k1, args.k2, args.max_count,
                                    center_window=_window(args.center_min, args.center_max),
                                    layer_window=_window(args.layer_min, args.layer_max))
    for hs in stars:
        print(json.dumps(hs.to_dict()))
    return 0


def _params(args):
    return ModelParams(args.lam, args.rho, args.variant)


def cmd_simulate(args):
    g = read_graph(args.graph)
    params = _params(args)
    init = parse_init(args.init, g.n)
    engine = args.engine
    if engine == "harris":
        try:
            traj = evolve_harris(g, params, init, build_harris_stream(g, params, args.horizon, args.seed))
        except MarkBudgetExceeded as exc:
            print(f"note: {exc}; falling back to the event-driven engine", file=sys.stderr)
            engine = "event"
    if engine == "event":
        traj = simulate_event_driven(g, params, init, args.horizon, args.seed, max_events=args.max_events)
    if args.trace_out:
        write_trace(args.trace_out, traj)
    problems = check_trajectory(g, params, traj) if args.check else []
    t = extinction_time(traj)
    print(json.dumps({"engine": engine, "events": len(traj), "extinction_time": float(t),
                      "censored": traj.censored, "horizon": traj.horizon, "invariant_violations": problems}))
    return 1 if problems else 0


def cmd_oracle(args):
    g = read_graph(args.graph)
    gen = build_generator(g, _params(args), cap=args.cap)
    out = {"states": gen.size, "init": args.init}
    if args.cdf_at is not None:
        out["t"] = args.cdf_at
        out["cdf"] = extinction_cdf(gen, args.init, args.cdf_at)
    if args.mean or args.cdf_at is None:
        out["mean"] = mean_extinction(gen, args.init)
    print(json.dumps(out))
    return 0


def cmd_experiment(args):
    cfg = ExperimentConfig.load(args.config, args.override)
    summary = run_experiment(cfg, workers=args.workers)
    print(json.dumps({"output_dir": cfg.output_dir, "gates_passed": summary["gates_passed"],
                      "no_data": summary["no_data"]}))
    return 0 if summary["gates_passed"] else 1


def _add_model(p):
    p.add_argument("--variant", default="SIRS", help="SIRS, SIS, SIR or THRESHOLD_SIRS")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--rho", type=float, default=0.0)


def build_parser():
    parser = argparse.ArgumentParser(prog="metastable-epi", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-graph", help="sample a power-law configuration-model graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--diameter", action="store_true", help="also report the diameter")
    p.set_defaults(func=cmd_generate_graph)

    p = sub.add_parser("extract-hstars", help="greedy vertex-disjoint hierarchical stars, one JSON line each")
    p.add_argument("--graph", required=True)
    p.add_argument("--k1", type=float, required=True)
    p.add_argument("--k2", type=float, required=True)
    p.add_argument("--max-count", type=int, default=None)
    for name in ("center-min", "center-max", "layer-min", "layer-max"):
        p.add_argument(f"--{name}", type=float, default=None)
    p.set_defaults(func=cmd_extract_hstars)

    p = sub.add_parser("simulate", help="simulate one trajectory")
    p.add_argument("--graph", required=True)
    _add_model(p)
    p.add_argument("--init", default="all-I", help="all-I, single:<v>, a state string, or a file")
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engine", choices=("harris", "event"), default="event")
    p.add_argument("--trace-out", default=None, help="CSV file with columns time,vertex,from,to")
    p.add_argument("--max-events", type=int, default=None)
    p.add_argument("--no-check", dest="check", action="store_false", help="skip the trajectory invariant check")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact mean extinction time or CDF on a tiny graph")
    p.add_argument("--graph", required=True)
    _add_model(p)
    p.add_argument("--init", required=True, help="state string such as IIS")
    p.add_argument("--mean", action="store_true")
    p.add_argument("--cdf-at", type=float, default=None)
    p.add_argument("--cap", type=int, default=None, help="override the vertex-count cap")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a JSON-configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $METASTABLE_EPI_WORKERS or the CPU count)")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
