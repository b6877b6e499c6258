"""Online policies: weight rounding, bin assignment, bin opening and bin selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .bins import BinFamily, BinKey, BinState, JobState, score
from .instance import Job, floor_log2, pow2


class SchedulerKind(enum.Enum):
    PROC = "p"
    DENS = "d"
    WEIGHT = "w"
    COMBINED = "min"

    @classmethod
    def parse(cls, value) -> "SchedulerKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "p": cls.PROC, "proc": cls.PROC, "procalgo": cls.PROC,
            "d": cls.DENS, "dens": cls.DENS, "densalgo": cls.DENS,
            "w": cls.WEIGHT, "weight": cls.WEIGHT, "weightalgo": cls.WEIGHT,
            "min": cls.COMBINED, "combined": cls.COMBINED, "combinedalgo": cls.COMBINED,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown scheduler kind {value!r}") from None

    @property
    def piecewise_constant(self) -> bool:
        """Scores only change at releases, completions and threshold crossings."""
        return self in (SchedulerKind.PROC, SchedulerKind.WEIGHT)


@dataclass(frozen=True)
class Assignment:
    bin: BinKey
    rounded_weight: Fraction
    newly_opened: tuple[BinKey, ...] = ()


def round_weight_up(w: Fraction) -> Fraction:
    """``2**(lg w + 1)``: strictly doubles exact powers of two."""
    return pow2(floor_log2(w) + 1)


def proc_key(j: Job) -> BinKey:
    return BinKey(BinFamily.PROC, floor_log2(j.proc))


def dens_key(j: Job) -> BinKey:
    return BinKey(BinFamily.DENS, floor_log2(j.density))


def weight_key(j: Job) -> BinKey:
    return BinKey(BinFamily.WEIGHT, floor_log2(j.weight) + 1)


def assign_proc(j: Job) -> Assignment:
    return Assignment(proc_key(j), round_weight_up(j.weight))


def assign_dens(j: Job) -> Assignment:
    key = dens_key(j)
    # new weight p / 2**i makes the density exactly 2**i
    return Assignment(key, j.proc / pow2(key.index))


def assign_weight(j: Job) -> Assignment:
    key = weight_key(j)
    return Assignment(key, pow2(key.index))


@dataclass
class SchedulerState:
    kind: SchedulerKind
    bins: dict[BinKey, BinState] = field(default_factory=dict)
    open_keys: set[BinKey] = field(default_factory=set)
    opened: list[BinKey] = field(default_factory=list)

    def bin(self, key: BinKey) -> BinState:
        b = self.bins.get(key)
        if b is None:
            b = self.bins[key] = BinState(key)
        return b

    def nonempty(self) -> list[BinState]:
        return [b for b in self.bins.values() if b]

    def assign(self, j: Job) -> Assignment:
        """Decide bin and rounded weight for ``j`` (opens bins for the combined policy)."""
        if self.kind is SchedulerKind.PROC:
            return assign_proc(j)
        if self.kind is SchedulerKind.DENS:
            return assign_dens(j)
        if self.kind is SchedulerKind.WEIGHT:
            return assign_weight(j)
        return assign_combined(j, self)

    def release(self, j: Job) -> tuple[Assignment, JobState]:
        a = self.assign(j)
        js = JobState(j, a.rounded_weight, j.proc)
        self.bin(a.bin).insert(js)
        return a, js

    def snapshot(self) -> dict[BinKey, BinState]:
        return {k: b.snapshot() for k, b in self.bins.items() if b}


def assign_combined(j: Job, state: SchedulerState) -> Assignment:
    if state.kind is not SchedulerKind.COMBINED:
        raise ValueError("assign_combined needs a combined-policy state")
    if proc_key(j) in state.open_keys:
        return assign_proc(j)
    if dens_key(j) in state.open_keys:
        return assign_dens(j)
    if weight_key(j) in state.open_keys:
        return assign_weight(j)
    triplet = (proc_key(j), dens_key(j), weight_key(j))
    for key in triplet:
        state.open_keys.add(key)
        state.opened.append(key)
        state.bin(key)
    a = assign_weight(j)
    return Assignment(a.bin, a.rounded_weight, triplet)


def select_bin(state: SchedulerState, current: BinKey | None = None) -> BinKey | None:
    """Arg-max of the bin scores; sticks with ``current`` on ties, then lowest key."""
    best_key, best_score = None, None
    for b in state.nonempty():
        s = score(b)
        if best_score is None or s > best_score or (s == best_score and b.key < best_key):
            best_key, best_score = b.key, s
    if best_key is None:
        return None
    if current is not None and current != best_key:
        cur = state.bins.get(current)
        if cur and score(cur) == best_score:
            return current
    return best_key
