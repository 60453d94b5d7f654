"""Model parameters and configurations.

Per-vertex states are stored as ``uint8`` arrays with ``S = 0``, ``I = 1``,
``R = 2``.
"""
import enum
from dataclasses import dataclass

import numpy as np

S, I, R = 0, 1, 2
STATE_CHARS = "SIR"


class Variant(enum.IntEnum):
    SIRS = 0
    SIS = 1
    SIR = 2
    THRESHOLD_SIRS = 3

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_")
        aliases = {"THRESHOLD": "THRESHOLD_SIRS", "TSIRS": "THRESHOLD_SIRS"}
        return cls[aliases.get(key, key)]


@dataclass(frozen=True)
class ModelParams:
    """Infection rate per directed edge, immunity-waning rate and variant.

    SIR requires ``rho == 0``.  SIS ignores ``rho``: recovery sends I
    straight back to S at rate 1.
    """

    lam: float
    rho: float = 0.0
    variant: Variant = Variant.SIRS

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if not self.lam >= 0:
            raise ValueError(f"lambda must be non-negative, got {self.lam!r}")
        if not self.rho >= 0:
            raise ValueError(f"rho must be non-negative, got {self.rho!r}")
        if self.variant == Variant.SIR and self.rho != 0:
            raise ValueError("SIR requires rho = 0")

    @property
    def waning_rate(self):
        """Rate actually used for R -> S (0 for SIS and SIR)."""
        return self.rho if self.variant in (Variant.SIRS, Variant.THRESHOLD_SIRS) else 0.0

    def to_dict(self):
        return {"lambda": self.lam, "rho": self.rho, "variant": self.variant.name}


def parse_configuration(text):
    """``"IIS"`` -> ``array([1, 1, 0], dtype=uint8)``."""
    try:
        return np.array([STATE_CHARS.index(c) for c in text.strip().upper()], dtype=np.uint8)
    except ValueError:
        raise ValueError(f"configuration {text!r} may only contain S, I and R") from None


def format_configuration(states):
    return "".join(STATE_CHARS[int(s)] for s in states)


def as_configuration(states, n=None):
    """Coerce a string or integer sequence into a validated state array."""
    if isinstance(states, str):
        cfg = parse_configuration(states)
    else:
        cfg = np.array(states, dtype=np.uint8)
    if cfg.ndim != 1 or (cfg > R).any():
        raise ValueError("configuration must be a 1-d sequence of states in {S, I, R}")
    if n is not None and cfg.size != n:
        raise ValueError(f"configuration has {cfg.size} entries, graph has {n} vertices")
    return cfg


def all_infected(n):
    return np.full(n, I, dtype=np.uint8)


def single_infected(n, v):
    cfg = np.zeros(n, dtype=np.uint8)
    cfg[v] = I
    return cfg


def check_variant_states(states, params):
    if params.variant == Variant.SIS and (np.asarray(states) == R).any():
        raise ValueError("SIS configurations cannot contain R")
