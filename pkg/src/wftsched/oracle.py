"""Exhaustive optimal preemptive schedule for small instances, plus baselines.

Search class: at every decision epoch (a release, or the completion of the job
chosen at the previous epoch) pick one alive job and run it until the next
release or its own completion, whichever comes first.  The class contains an
optimal schedule.  Between two consecutive releases the alive set only
shrinks, and any piece of work on a job that does not finish before the next
release can be moved to the end of that interval without delaying anything
else.  Repeating that exchange leaves a schedule that only switches jobs at
releases and completions, and which is never worse.  Every schedule in the
class is work-conserving.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .engine import RunResult, ScheduleTrace, Segment, StepFunction, weight_trace, weighted_flow
from .instance import Instance

DEFAULT_LIMIT = 6


class OracleLimitError(ValueError):
    pass


@dataclass
class OracleResult:
    best: RunResult
    schedules_explored: int

    @property
    def cost(self) -> Fraction:
        return self.best.cost


def _run_from_plan(inst: Instance, plan, label: str) -> RunResult:
    trace = ScheduleTrace()
    t = Fraction(0)
    for start, end, job in plan:
        if start > t:
            trace.append(Segment(t, start, None))
        trace.append(Segment(start, end, job))
        t = end
    vol = trace.processed_volume()
    for j in inst:
        done = [s.end for s in trace.segments if s.job == j.index]
        if vol.get(j.index) != j.proc:
            raise AssertionError(f"plan does not finish job {j.index}")  # pragma: no cover
        trace.completions[j.index] = max(done)
    return RunResult(inst, trace, weighted_flow(trace, inst), mode="offline", label=label)


class _Search:
    def __init__(self, inst: Instance, memoize: bool):
        self.jobs = inst.jobs
        self.releases = sorted({j.release for j in inst})
        self.memo: dict | None = {} if memoize else None
        self.explored = 0

    def _next_release(self, t):
        for r in self.releases:
            if r > t:
                return r
        return None

    def solve(self, t: Fraction, rem: tuple):
        """Minimum remaining integral of alive weight from ``t``; returns (cost, plan)."""
        key = (t, rem)
        if self.memo is not None and key in self.memo:
            return self.memo[key]
        alive = [k for k, j in enumerate(self.jobs) if j.release <= t and rem[k] > 0]
        nr = self._next_release(t)
        if not alive:
            if nr is None:
                self.explored += 1
                result = (Fraction(0), ())
            else:
                result = self.solve(nr, rem)
        else:
            alive_weight = sum((self.jobs[k].weight for k in alive), Fraction(0))
            result = None
            for k in alive:
                dt = rem[k] if nr is None else min(rem[k], nr - t)
                child = rem[:k] + (rem[k] - dt,) + rem[k + 1:]
                sub_cost, sub_plan = self.solve(t + dt, child)
                cost = alive_weight * dt + sub_cost
                if result is None or cost < result[0]:
                    result = (cost, ((t, t + dt, self.jobs[k].index),) + sub_plan)
        if self.memo is not None:
            self.memo[key] = result
        return result


def brute_force_opt(inst: Instance, limit: int = DEFAULT_LIMIT, memoize: bool = True) -> OracleResult:
    if len(inst) == 0:
        raise ValueError("oracle needs a nonempty instance")
    if len(inst) > limit:
        raise OracleLimitError(
            f"instance has {len(inst)} jobs; brute-force oracle is limited to {limit}"
        )
    search = _Search(inst, memoize)
    start = min(j.release for j in inst)
    cost, plan = search.solve(start, tuple(j.proc for j in inst.jobs))
    run = _run_from_plan(inst, _merge(plan), "opt")
    if run.cost != cost:
        raise AssertionError("oracle plan cost disagrees with search cost")  # pragma: no cover
    return OracleResult(run, search.explored)


def _merge(plan):
    out = []
    for start, end, job in plan:
        if out and out[-1][2] == job and out[-1][1] == start:
            out[-1] = (out[-1][0], end, job)
        else:
            out.append((start, end, job))
    return out


def random_schedule(inst: Instance, rng: random.Random) -> RunResult:
    """One uniformly-chosen path through the oracle's decision class."""
    jobs = inst.jobs
    releases = sorted({j.release for j in inst})
    rem = [j.proc for j in jobs]
    t = min(releases)
    plan = []
    while any(rem):
        alive = [k for k, j in enumerate(jobs) if j.release <= t and rem[k] > 0]
        nr = next((r for r in releases if r > t), None)
        if not alive:
            t = nr
            continue
        k = rng.choice(alive)
        dt = rem[k] if nr is None else min(rem[k], nr - t)
        plan.append((t, t + dt, jobs[k].index))
        rem[k] -= dt
        t += dt
    return _run_from_plan(inst, _merge(plan), "random")


def hdf_baseline(inst: Instance) -> RunResult:
    """Highest residual density w/p_t first; ties go to the smaller index."""
    if len(inst) == 0:
        raise ValueError("cannot schedule an empty instance")
    jobs = inst.jobs
    releases = sorted({j.release for j in inst})
    rem = {j.index: j.proc for j in jobs}
    t = min(releases)
    plan = []
    while any(rem.values()):
        alive = [j for j in jobs if j.release <= t and rem[j.index] > 0]
        nr = next((r for r in releases if r > t), None)
        if not alive:
            t = nr
            continue
        pick = min(alive, key=lambda j: (-(j.weight / rem[j.index]), j.index))
        dt = rem[pick.index] if nr is None else min(rem[pick.index], nr - t)
        plan.append((t, t + dt, pick.index))
        rem[pick.index] -= dt
        t += dt
    return _run_from_plan(inst, _merge(plan), "hdf")


def opt_weight_trace(oracle: OracleResult, inst: Instance | None = None) -> StepFunction:
    """Alive weight of the optimal schedule over time.

    Weights come from ``inst`` (default: the instance the oracle solved), so
    passing a rounded copy evaluates the same schedule under rounded weights.
    """
    inst = oracle.best.instance if inst is None else inst
    if [(j.index, j.release, j.proc) for j in inst] != [
        (j.index, j.release, j.proc) for j in oracle.best.instance
    ]:
        raise ValueError("instance does not match the oracle's instance")
    return weight_trace(oracle.best, inst, "original")
