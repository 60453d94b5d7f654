"""File formats.

Graphs are line-oriented text: a header ``n m`` then one ``u v`` line per
edge (0-indexed).  Generated graphs get a JSON sidecar ``<file>.meta.json``
holding ``tau``, ``seed`` and the sampled degree list.
"""
import csv
import json
from pathlib import Path

import numpy as np

from .dynamics.model import STATE_CHARS, all_infected, as_configuration, single_infected
from .graph_core import SimpleGraph


def sidecar_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_graph(path, g, meta=None):
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{g.n} {g.m}\n")
        np.savetxt(fh, g.edges, fmt="%d")
    if meta is not None:
        sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_graph(path):
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: header must be 'n m'")
        n, m = int(header[0]), int(header[1])
        edges = np.loadtxt(fh, dtype=np.int64, ndmin=2) if m else np.empty((0, 2), dtype=np.int64)
    if edges.shape != (m, 2):
        raise ValueError(f"{path}: header announces {m} edges, found {edges.shape[0]}")
    return SimpleGraph.from_edges(n, edges)


def read_meta(path):
    p = sidecar_path(path)
    return json.loads(p.read_text()) if p.exists() else None


def write_trace(path, traj):
    """CSV with columns ``time,vertex,from,to``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "vertex", "from", "to"])
        for t, v, a, b in traj.events():
            w.writerow([repr(t), v, STATE_CHARS[a], STATE_CHARS[b]])


def read_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return (np.array([float(r["time"]) for r in rows]),
            np.array([int(r["vertex"]) for r in rows], dtype=np.int64),
            np.array([STATE_CHARS.index(r["from"]) for r in rows], dtype=np.uint8),
            np.array([STATE_CHARS.index(r["to"]) for r in rows], dtype=np.uint8))


def write_replicates(path, times, censored):
    """CSV ``replicate,extinction_time,censored``; times in ``repr`` form so
    reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "extinction_time", "censored"])
        for i, (t, c) in enumerate(zip(times, censored)):
            w.writerow([i, repr(float(t)), int(bool(c))])


def write_epochs(path, w_series):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "W"])
        for r, value in enumerate(w_series):
            w.writerow([r, int(value)])


def parse_init(spec, n):
    """``all-I``, ``single:<v>``, a literal ``SIR`` string, or a file path
    holding such a string."""
    spec = spec.strip()
    if spec.lower() in ("all-i", "all_i", "all"):
        return all_infected(n)
    if spec.lower().startswith("single:"):
        v = int(spec.split(":", 1)[1])
        if not 0 <= v < n:
            raise ValueError(f"vertex {v} out of range for n={n}")
        return single_infected(n, v)
    if len(spec) == n and set(spec.upper()) <= set(STATE_CHARS):
        return as_configuration(spec, n)
    path = Path(spec)
    if path.exists():
        return as_configuration("".join(path.read_text().split()), n)
    raise ValueError(f"cannot interpret initial configuration {spec!r}")
