"""SIRS, SIS, SIR and threshold-SIRS dynamics on simple graphs."""
from .event_driven import EventDrivenSimulator, extinction_times, simulate_event_driven
from .harris import (
    HarrisStream,
    MarkBudgetExceeded,
    MarkList,
    build_harris_stream,
    evolve_harris,
    simulate_harris,
)
from .model import (
    I,
    R,
    S,
    ModelParams,
    Variant,
    all_infected,
    as_configuration,
    format_configuration,
    parse_configuration,
    single_infected,
)
from .trajectory import Censored, Trajectory, check_trajectory, extinction_time, is_censored

__all__ = [
    "S", "I", "R", "Variant", "ModelParams", "Trajectory", "Censored",
    "HarrisStream", "MarkList", "MarkBudgetExceeded", "EventDrivenSimulator",
    "build_harris_stream", "evolve_harris", "simulate_harris",
    "simulate_event_driven", "extinction_times", "extinction_time", "is_censored", "check_trajectory",
    "all_infected", "single_infected", "as_configuration", "parse_configuration",
    "format_configuration",
]
