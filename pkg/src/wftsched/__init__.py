"""Exact simulation and verification of bin-based online schedulers for weighted flow time."""

from .bins import BinFamily, BinKey, BinState, JobState
from .engine import RunResult, simulate, simulate_exact, simulate_quantum, weighted_flow
from .estimators import HDFScheduler, OnlineScheduler, OptimalScheduler, check_instance, competitive_ratio
from .instance import Instance, Job, floor_log2, generate_instance, instance_stats, parse_instance, pow2, serialize_instance
from .oracle import brute_force_opt, hdf_baseline
from .schedulers import SchedulerKind

__all__ = [
    "BinFamily", "BinKey", "BinState", "JobState",
    "RunResult", "simulate", "simulate_exact", "simulate_quantum", "weighted_flow",
    "HDFScheduler", "OnlineScheduler", "OptimalScheduler", "check_instance", "competitive_ratio",
    "Instance", "Job", "floor_log2", "generate_instance", "instance_stats", "parse_instance", "pow2",
    "serialize_instance",
    "brute_force_opt", "hdf_baseline",
    "SchedulerKind",
]

__version__ = "0.1.0"
