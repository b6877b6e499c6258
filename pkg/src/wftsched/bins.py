"""Bins, the within-bin priority order, contribution functions and bin scores.

A bin stacks its alive jobs bottom-to-top by the priority order; the last
job is the only one the scheduler may process.  A horizontal bar at height
``x`` collects volume from each job according to the bin family's
contribution function, evaluated at the job's base (the weight stacked
below it).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple

from .instance import Job, as_rational, floor_log2, pow2


class BinFamily(enum.IntEnum):
    PROC = 1
    DENS = 2
    WEIGHT = 3

    @property
    def label(self) -> str:
        return {BinFamily.PROC: "proc", BinFamily.DENS: "dens", BinFamily.WEIGHT: "weight"}[self]


class BinKey(NamedTuple):
    family: BinFamily
    index: int

    def __str__(self):
        return f"{self.family.label}[{self.index}]"


@dataclass(frozen=True)
class JobState:
    job: Job
    rounded_weight: Fraction
    remaining: Fraction

    @property
    def index(self) -> int:
        return self.job.index

    @property
    def weight_class(self) -> int:
        return floor_log2(self.rounded_weight)

    @property
    def current_density(self) -> Fraction:
        return self.remaining / self.rounded_weight

    def processed(self, amount: Fraction) -> "JobState":
        return replace(self, remaining=self.remaining - amount)


def prec_less(a: JobState, b: JobState) -> bool:
    """True iff ``a`` sits strictly below ``b`` in their bin."""
    if a.index == b.index:
        raise ValueError(f"cannot compare job {a.index} with itself")
    la, lb = a.weight_class, b.weight_class
    if la != lb:
        return la < lb
    da, db = a.current_density, b.current_density
    if da != db:
        return da > db
    return b.index < a.index


class BinState:
    """Alive jobs of one bin, bottom first; ``jobs[-1]`` is the top job."""

    __slots__ = ("key", "jobs")

    def __init__(self, key: BinKey, jobs=()):
        self.key = key
        self.jobs: list[JobState] = list(jobs)

    def __len__(self):
        return len(self.jobs)

    def __bool__(self):
        return bool(self.jobs)

    def __repr__(self):
        inner = ", ".join(f"J{j.index}(w={j.rounded_weight}, p_t={j.remaining})" for j in self.jobs)
        return f"BinState({self.key}, [{inner}])"

    @property
    def top(self) -> JobState:
        if not self.jobs:
            raise ValueError(f"bin {self.key} is empty")
        return self.jobs[-1]

    @property
    def total_weight(self) -> Fraction:
        return sum((j.rounded_weight for j in self.jobs), Fraction(0))

    @property
    def total_remaining(self) -> Fraction:
        return sum((j.remaining for j in self.jobs), Fraction(0))

    def snapshot(self) -> "BinState":
        # JobState is immutable, so a shallow list copy is a full snapshot
        return BinState(self.key, self.jobs)

    def insert(self, js: JobState) -> int:
        """Insert by binary search under the priority order; returns the position."""
        lo, hi = 0, len(self.jobs)
        while lo < hi:
            mid = (lo + hi) // 2
            if prec_less(self.jobs[mid], js):
                lo = mid + 1
            else:
                hi = mid
        self.jobs.insert(lo, js)
        return lo

    def position(self, index: int) -> int:
        for pos, js in enumerate(self.jobs):
            if js.index == index:
                return pos
        raise KeyError(f"job {index} is not in bin {self.key}")

    def bases(self) -> list[Fraction]:
        out, acc = [], Fraction(0)
        for js in self.jobs:
            out.append(acc)
            acc += js.rounded_weight
        return out


def _require_positive(w, p):
    if w <= 0:
        raise ValueError(f"contribution weight must be positive, got {w}")
    if p <= 0:
        raise ValueError(f"contribution volume must be positive, got {p}")


def mu_proc(i: int, x, w, p, h) -> Fraction:
    x, w, p, h = (as_rational(v) for v in (x, w, p, h))
    _require_positive(w, p)
    if x >= h + w:
        return p
    if x >= h + w / 2:
        return min(pow2(i), p)
    return Fraction(0)


def mu_dens(i: int, x, w, p, h) -> Fraction:
    x, w, p, h = (as_rational(v) for v in (x, w, p, h))
    _require_positive(w, p)
    kappa = h + pow2(floor_log2(w))
    if x >= kappa + p / pow2(i):
        return p
    if x >= kappa:
        return pow2(i) * (x - kappa)
    return Fraction(0)


def mu_weight(x, w, p, h) -> Fraction:
    x, w, p, h = (as_rational(v) for v in (x, w, p, h))
    _require_positive(w, p)
    return p if x >= h + w else Fraction(0)


def mu_for(key: BinKey):
    """The bin's contribution function as ``f(x, w, p, h)``."""
    if key.family is BinFamily.PROC:
        return lambda x, w, p, h: mu_proc(key.index, x, w, p, h)
    if key.family is BinFamily.DENS:
        return lambda x, w, p, h: mu_dens(key.index, x, w, p, h)
    return mu_weight


def base(bin: BinState, j: JobState) -> Fraction:
    pos = bin.position(j.index)
    return sum((js.rounded_weight for js in bin.jobs[:pos]), Fraction(0))


def contribution(bin: BinState, j: JobState, x) -> Fraction:
    pos = bin.position(j.index)
    js = bin.jobs[pos]
    return mu_for(bin.key)(x, js.rounded_weight, js.remaining, bin.bases()[pos])


def job_contributions(bin: BinState, x) -> list[Fraction]:
    """gamma for every job of the bin (bottom first) at bar height ``x``."""
    mu = mu_for(bin.key)
    return [mu(x, js.rounded_weight, js.remaining, h) for js, h in zip(bin.jobs, bin.bases())]


def bin_bar_total(bin: BinState, x) -> Fraction:
    return sum(job_contributions(bin, x), Fraction(0))


def job_breakpoints(key: BinKey, js: JobState, h: Fraction) -> tuple[Fraction, Fraction]:
    w = js.rounded_weight
    if key.family is BinFamily.DENS:
        kappa = h + pow2(floor_log2(w))
        return kappa, kappa + js.remaining / pow2(key.index)
    return h + w / 2, h + w


def bar_breakpoints(bin: BinState) -> list[Fraction]:
    points = set()
    for js, h in zip(bin.jobs, bin.bases()):
        points.update(job_breakpoints(bin.key, js, h))
    return sorted(points)


def score(bin: BinState) -> Fraction:
    """The quantity the scheduler maximises over bins."""
    if not bin:
        raise ValueError(f"score of empty bin {bin.key}")
    top = bin.top
    total = bin.total_weight
    family, i = bin.key
    if family is BinFamily.PROC:
        if top.remaining <= pow2(i):
            return total - top.rounded_weight / 2
        return total
    if family is BinFamily.DENS:
        return total - top.rounded_weight + pow2(top.weight_class) + top.remaining / pow2(i)
    return total


def bin_height(bin: BinState) -> Fraction:
    """Lowest bar height at which the top job contributes its whole remaining volume.

    The top job's contribution is a nondecreasing right-continuous step or ramp,
    so the infimum is attained at one of its own breakpoints.
    """
    if not bin:
        raise ValueError(f"height of empty bin {bin.key}")
    top = bin.top
    h = bin.bases()[-1]
    mu = mu_for(bin.key)
    candidates = sorted(set(job_breakpoints(bin.key, top, h)))
    for x in candidates:
        if mu(x, top.rounded_weight, top.remaining, h) >= top.remaining:
            return x
    raise AssertionError(f"top job of {bin.key} never fully contributes")  # pragma: no cover
