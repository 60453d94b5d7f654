"""Observables computed from trajectories and replicate samples."""
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics.model import I
from .rng import generator
from .structures import lit_first_layer


def count_series(traj):
    """Counts ``(#S, #I, #R)`` after each change point.

    Returns ``(times, counts)`` where ``times[0] == 0`` holds the initial
    counts and row ``j > 0`` holds the counts right after event ``j - 1``.
    """
    init = np.bincount(traj.initial, minlength=3)[:3].astype(np.int64)
    delta = np.zeros((len(traj), 3), dtype=np.int64)
    rows = np.arange(len(traj))
    np.add.at(delta, (rows, traj.old.astype(np.int64)), -1)
    np.add.at(delta, (rows, traj.new.astype(np.int64)), 1)
    counts = np.vstack((init, init + np.cumsum(delta, axis=0)))
    times = np.concatenate(([0.0], traj.times))
    return times, counts


@dataclass(frozen=True)
class EpochSchedule:
    """Observation times ``t_r = r * spacing``, ``r = 0..R``.

    With ``spacing = 3 n**eps2`` this is the schedule of the hierarchical
    star persistence argument; see :meth:`from_ladder`.
    """

    times: np.ndarray
    n: int = 0
    eps2: float = math.nan

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.size == 0 or t[0] != 0 or (np.diff(t) <= 0).any():
            raise ValueError("epoch times must start at 0 and increase")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)

    @classmethod
    def uniform(cls, spacing, epochs, n=0, eps2=math.nan):
        return cls(np.arange(epochs + 1) * float(spacing), n, eps2)

    @classmethod
    def from_ladder(cls, n, eps2, epochs):
        return cls.uniform(3.0 * n**eps2, epochs, n, eps2)

    @property
    def spacing(self):
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else math.nan


def configurations_at(traj, times):
    """Configurations at increasing ``times``, one row per time.

    An event exactly at ``t`` is counted as having happened (right-continuous
    paths).
    """
    times = np.asarray(times, dtype=np.float64)
    if (np.diff(times) < 0).any():
        raise ValueError("times must be non-decreasing")
    cut = np.searchsorted(traj.times, times, side="right")
    out = np.empty((times.size, traj.n), dtype=np.uint8)
    cfg = traj.initial.copy()
    done = 0
    for r, k in enumerate(cut):
        cfg[traj.vertices[done:k]] = traj.new[done:k]
        done = k
        out[r] = cfg
    return out


def lit_count_series(traj, hs, m, sched):
    """``W_r``: first-layer vertices ``m``-lit among their own leaves at each
    epoch."""
    if sched.times[-1] > traj.horizon and traj.censored:
        raise ValueError(f"schedule ends at {sched.times[-1]:g}, beyond the censoring horizon {traj.horizon:g}")
    cfgs = configurations_at(traj, sched.times)
    return np.array([int(lit_first_layer(c, hs, m).sum()) for c in cfgs], dtype=np.int64)


def infected_series(traj, times):
    return (configurations_at(traj, times) == I).sum(axis=1)


# --------------------------------------------------------------- survival


@dataclass(frozen=True)
class SurvivalReport:
    """Summary of extinction-time samples.

    Censored samples count as ``+inf`` in the median and are excluded from
    the mean.  ``median_lower_bound`` is set when at least half the samples
    are censored: the median is then only known to exceed the horizon.
    """

    samples: np.ndarray
    censored: np.ndarray
    median: float
    median_lower_bound: bool
    mean_uncensored: float
    censor_fraction: float
    ci_low: float
    ci_high: float
    bootstrap_reps: int
    params: dict = field(default_factory=dict)

    def to_dict(self, include_samples=False):
        d = {
            "n_samples": int(self.samples.size),
            "median": _json_float(self.median),
            "median_lower_bound": self.median_lower_bound,
            "mean_uncensored": _json_float(self.mean_uncensored),
            "mean_is_uncensored_only": True,
            "censor_fraction": self.censor_fraction,
            "median_ci95": [_json_float(self.ci_low), _json_float(self.ci_high)],
            "bootstrap_reps": self.bootstrap_reps,
            "params": self.params,
        }
        if include_samples:
            d["samples"] = self.samples.tolist()
            d["censored"] = self.censored.tolist()
        return d


def _json_float(x):
    return None if x is None or not math.isfinite(x) else float(x)


def summarize_survival(samples, bootstrap_reps=1000, seed=0, censored=None, horizon=None, params=None):
    """Median, uncensored mean and percentile-bootstrap 95% CI of the median.

    ``samples`` are extinction times; censored entries are flagged either by
    the ``censored`` mask, by ``math.inf`` or by :class:`Censored` values.
    """
    x = np.asarray([float(s) for s in samples], dtype=np.float64)
    if x.size == 0:
        raise ValueError("at least one sample is required")
    if censored is None:
        censored = np.array([getattr(s, "censored", False) or math.isinf(float(s)) for s in samples])
    censored = np.asarray(censored, dtype=bool)
    obs = np.where(censored, np.inf, x)
    frac = float(censored.mean())
    median = float(np.median(obs))
    lower = bool(math.isinf(median))
    if lower:
        median = float(horizon) if horizon is not None else float(np.max(x))
    mean = float(x[~censored].mean()) if (~censored).any() else math.nan
    rng = generator(seed, 23)
    boot = np.empty(bootstrap_reps)
    step = max(1, 10**7 // x.size)
    for start in range(0, bootstrap_reps, step):
        stop = min(start + step, bootstrap_reps)
        idx = rng.integers(0, x.size, size=(stop - start, x.size))
        boot[start:stop] = np.median(obs[idx], axis=1)
    if bootstrap_reps:
        # order-statistic endpoints: interpolation is undefined between +inf values
        lo = np.percentile(boot, 2.5, method="lower")
        hi = np.percentile(boot, 97.5, method="higher")
    else:
        lo = hi = math.nan
    return SurvivalReport(
        samples=x, censored=censored, median=median, median_lower_bound=lower,
        mean_uncensored=mean, censor_fraction=frac, ci_low=float(lo), ci_high=float(hi),
        bootstrap_reps=int(bootstrap_reps), params=dict(params or {}),
    )
