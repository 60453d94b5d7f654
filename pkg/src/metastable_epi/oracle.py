"""Exact transient analysis of the epidemic chain on tiny graphs.

The full configuration space is enumerated with a positional base-3 code
(base 2 for SIS, which never visits R); vertex 0 is the least significant
digit.  Mean absorption times come from a sparse linear solve on the
transient block; the extinction-time CDF from uniformization.
"""
from dataclasses import dataclass

import numpy as np
from scipy import sparse, stats
from scipy.sparse import linalg as splinalg

from .dynamics.model import I, R, S, Variant, as_configuration

#: Largest vertex counts accepted by :func:`build_generator`.
DEFAULT_CAP = {Variant.SIS: 10, Variant.SIRS: 7, Variant.SIR: 7, Variant.THRESHOLD_SIRS: 7}

DIRECT_SOLVE_MAX = 3**7


class StateSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorMatrix:
    """Sparse CTMC generator ``Q`` over all configurations.

    ``states[x]`` is the configuration with index ``x``; ``absorbing`` marks
    the infection-free configurations.
    """

    q: sparse.csr_matrix
    states: np.ndarray
    absorbing: np.ndarray
    base: int

    @property
    def size(self):
        return self.states.shape[0]

    def index(self, config):
        config = as_configuration(config, self.states.shape[1])
        if self.base == 2 and (config == R).any():
            raise ValueError("SIS state space has no R")
        digits = np.where(config == I, 1, np.where(config == R, 2, 0)) if self.base == 3 else (config == I).astype(int)
        return int(np.dot(digits, self.base ** np.arange(config.size)))

    def exit_rates(self):
        return -self.q.diagonal()


def _encode_states(n, base):
    codes = np.arange(base**n)
    digits = (codes[:, None] // base ** np.arange(n)[None, :]) % base
    if base == 2:
        return np.where(digits == 1, I, S).astype(np.uint8)
    return np.select([digits == 0, digits == 1], [S, I], R).astype(np.uint8)


def build_generator(g, params, cap=None):
    """Exact generator of the epidemic chain on ``g``.

    Refuses graphs with more than ``cap`` vertices (defaults: 10 for SIS,
    7 otherwise).
    """
    variant = params.variant
    cap = DEFAULT_CAP[variant] if cap is None else cap
    if g.n > cap:
        raise StateSpaceTooLarge(f"{g.n} vertices exceed the cap of {cap}; pass cap={g.n} to override")
    base = 2 if variant == Variant.SIS else 3
    states = _encode_states(g.n, base)
    size = states.shape[0]
    infected = (states == I).astype(np.int64)
    adj = np.zeros((g.n, g.n), dtype=np.int64)
    if g.m:
        adj[g.edges[:, 0], g.edges[:, 1]] = 1
        adj[g.edges[:, 1], g.edges[:, 0]] = 1
    nb_inf = infected @ adj
    weight = base ** np.arange(g.n)
    digit_of = {S: 0, I: 1, R: 2} if base == 3 else {S: 0, I: 1}
    rows, cols, vals = [], [], []
    idx = np.arange(size)
    for v in range(g.n):
        sv = states[:, v]
        # S -> I
        if variant == Variant.THRESHOLD_SIRS:
            rate = params.lam * (nb_inf[:, v] >= 1)
        else:
            rate = params.lam * nb_inf[:, v]
        mask = (sv == S) & (rate > 0)
        rows.append(idx[mask])
        cols.append(idx[mask] + (digit_of[I] - digit_of[S]) * weight[v])
        vals.append(rate[mask].astype(np.float64))
        # I -> R, or I -> S for SIS
        mask = sv == I
        target = S if variant == Variant.SIS else R
        rows.append(idx[mask])
        cols.append(idx[mask] + (digit_of[target] - digit_of[I]) * weight[v])
        vals.append(np.ones(mask.sum()))
        # R -> S
        if base == 3 and params.waning_rate > 0:
            mask = sv == R
            rows.append(idx[mask])
            cols.append(idx[mask] - digit_of[R] * weight[v])
            vals.append(np.full(mask.sum(), params.waning_rate))
    rows, cols, vals = (np.concatenate(x) for x in (rows, cols, vals))
    off = sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
    out = np.asarray(off.sum(axis=1)).ravel()
    q = (off - sparse.diags(out)).tocsr()
    q.sort_indices()
    absorbing = ~(states == I).any(axis=1)
    return GeneratorMatrix(q, states, absorbing, base)


def mean_extinction(gen, init, rtol=1e-10):
    """Expected time to reach an infection-free configuration from ``init``."""
    x0 = gen.index(init)
    if gen.absorbing[x0]:
        return 0.0
    transient = np.flatnonzero(~gen.absorbing)
    a = -gen.q[transient][:, transient].tocsc()
    b = np.ones(transient.size)
    if transient.size <= DIRECT_SOLVE_MAX:
        m = splinalg.spsolve(a, b)
    else:
        m, info = splinalg.gmres(a, b, rtol=rtol * 1e-2, restart=200, maxiter=10_000)
        if info != 0:
            raise RuntimeError(f"iterative solve did not converge (info={info})")
    resid = np.linalg.norm(a @ m - b) / np.linalg.norm(b)
    if not np.all(np.isfinite(m)) or resid > rtol:
        raise RuntimeError(f"absorption-time system is singular or ill-conditioned (residual {resid:.3g})")
    return float(m[np.searchsorted(transient, x0)])


def extinction_cdf(gen, init, t, tol=1e-8):
    """``P(T <= t)`` by uniformization with Poisson truncation error ``<= tol``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    x0 = gen.index(init)
    if gen.absorbing[x0]:
        return 1.0
    if t == 0:
        return 0.0
    rate = float(gen.exit_rates().max())
    p = sparse.identity(gen.size, format="csr") + gen.q / rate
    pt = p.T.tocsr()
    mean = rate * t
    hi = int(stats.poisson.isf(tol, mean)) + 1
    weights = stats.poisson.pmf(np.arange(hi + 1), mean)
    pi = np.zeros(gen.size)
    pi[x0] = 1.0
    acc = 0.0
    for w in weights:
        acc += w * pi[gen.absorbing].sum()
        pi = pt @ pi
    return float(min(max(acc, 0.0), 1.0))
