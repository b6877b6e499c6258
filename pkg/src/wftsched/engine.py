"""Continuous-time simulation of the bin policies with exact rational bookkeeping."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, TextIO

from .bins import BinFamily, BinKey, BinState, JobState
from .instance import Instance, Job, as_rational, format_rational, pow2
from .schedulers import Assignment, SchedulerKind, SchedulerState, select_bin


class EventKind(enum.Enum):
    RELEASE = "release"
    COMPLETION = "completion"
    THRESHOLD = "threshold"
    QUANTUM = "quantum"


@dataclass(frozen=True)
class Event:
    time: Fraction
    kind: EventKind
    job: int | None = None
    bin: BinKey | None = None


@dataclass(frozen=True)
class Segment:
    start: Fraction
    end: Fraction
    job: int | None  # None means idle
    bin: BinKey | None = None


@dataclass
class ScheduleTrace:
    segments: list[Segment] = field(default_factory=list)
    completions: dict[int, Fraction] = field(default_factory=dict)

    def append(self, seg: Segment):
        if self.segments:
            last = self.segments[-1]
            if last.end != seg.start:
                raise ValueError(f"non-contiguous segment {seg} after {last}")
            if last.job == seg.job and last.bin == seg.bin:
                self.segments[-1] = Segment(last.start, seg.end, seg.job, seg.bin)
                return
        self.segments.append(seg)

    def processed_volume(self) -> dict[int, Fraction]:
        vol: dict[int, Fraction] = {}
        for s in self.segments:
            if s.job is not None:
                vol[s.job] = vol.get(s.job, Fraction(0)) + (s.end - s.start)
        return vol


class StepFunction:
    """Right-continuous step function, zero before its first breakpoint."""

    def __init__(self, breakpoints: Iterable[tuple[Fraction, Fraction]]):
        pts = list(breakpoints)
        for (a, _), (b, _) in zip(pts, pts[1:]):
            if not a < b:
                raise ValueError("step function times must be strictly increasing")
        self.breakpoints: list[tuple[Fraction, Fraction]] = pts

    @classmethod
    def from_changes(cls, changes: dict[Fraction, Fraction]) -> "StepFunction":
        pts, value = [], Fraction(0)
        for t in sorted(changes):
            if changes[t] == 0:
                continue
            value += changes[t]
            pts.append((t, value))
        return cls(pts)

    @property
    def times(self) -> list[Fraction]:
        return [t for t, _ in self.breakpoints]

    def __call__(self, t) -> Fraction:
        t = as_rational(t)
        value = Fraction(0)
        for bt, bv in self.breakpoints:
            if bt > t:
                break
            value = bv
        return value

    def __repr__(self):
        return f"StepFunction({[(str(t), str(v)) for t, v in self.breakpoints]})"


def integrate_step(f: StepFunction) -> Fraction:
    if f.breakpoints and f.breakpoints[-1][1] != 0:
        raise ValueError("step function has unbounded support (final value is nonzero)")
    total = Fraction(0)
    for (a, v), (b, _) in zip(f.breakpoints, f.breakpoints[1:]):
        total += v * (b - a)
    return total


@dataclass(frozen=True)
class Arrival:
    """A release as seen by the target bin, just before and just after insertion."""

    time: Fraction
    job: Job
    assignment: Assignment
    before: BinState
    after: BinState


@dataclass(frozen=True)
class Decision:
    """State after all events at ``start``; ``job`` is processed until ``end``."""

    start: Fraction
    end: Fraction
    bins: dict[BinKey, BinState]
    bin: BinKey
    job: int

    def mid_state(self) -> dict[BinKey, BinState]:
        """Bin contents halfway through the processing segment."""
        half = (self.end - self.start) / 2
        out = dict(self.bins)
        b = out[self.bin]
        out[self.bin] = BinState(b.key, b.jobs[:-1] + [b.jobs[-1].processed(half)])
        return out


@dataclass
class RunResult:
    instance: Instance
    trace: ScheduleTrace
    cost: Fraction
    kind: SchedulerKind | None = None
    mode: str = "exact"
    delta: Fraction | None = None
    rounded_weights: dict[int, Fraction] = field(default_factory=dict)
    bin_of: dict[int, BinKey] = field(default_factory=dict)
    arrivals: list[Arrival] = field(default_factory=list)
    decisions: list[Decision] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    opened_bins: list[BinKey] = field(default_factory=list)
    label: str = ""

    @property
    def weight_fn(self) -> StepFunction:
        return weight_trace(self, self.instance, "original")

    def rounded_instance(self) -> Instance:
        """The instance with weights replaced by what the policy actually used."""
        return self.instance.with_weights(self.rounded_weights)

    def threshold_events(self) -> list[Event]:
        return [e for e in self.events if e.kind is EventKind.THRESHOLD]

    def nonempty_bins_at(self, t) -> int:
        t = as_rational(t)
        keys = {
            self.bin_of[j.index]
            for j in self.instance
            if j.release <= t < self.trace.completions[j.index]
        }
        return len(keys)


def weighted_flow(trace: ScheduleTrace, inst: Instance) -> Fraction:
    total = Fraction(0)
    for j in inst:
        if j.index not in trace.completions:
            raise ValueError(f"job {j.index} never completes in the trace")
        total += j.weight * (trace.completions[j.index] - j.release)
    return total


def weight_trace(run: RunResult, inst: Instance | None = None, weights: str = "original") -> StepFunction:
    """Total alive weight over time: up at releases, down at completions."""
    inst = run.instance if inst is None else inst
    if weights not in ("original", "rounded"):
        raise ValueError(f"weights must be 'original' or 'rounded', got {weights!r}")
    changes: dict[Fraction, Fraction] = {}
    for j in inst:
        w = run.rounded_weights.get(j.index, j.weight) if weights == "rounded" else j.weight
        c = run.trace.completions[j.index]
        changes[j.release] = changes.get(j.release, Fraction(0)) + w
        changes[c] = changes.get(c, Fraction(0)) - w
    return StepFunction.from_changes(changes)


def _simulate(inst: Instance, kind: SchedulerKind, delta: Fraction | None, mode: str) -> RunResult:
    if len(inst) == 0:
        raise ValueError("cannot simulate an empty instance")
    state = SchedulerState(kind)
    trace = ScheduleTrace()
    run = RunResult(inst, trace, Fraction(0), kind=kind, mode=mode, delta=delta)
    pending = list(inst.jobs)
    nxt = 0
    t = Fraction(0)
    current: BinKey | None = None
    alive = 0

    while True:
        while nxt < len(pending) and pending[nxt].release <= t:
            job = pending[nxt]
            nxt += 1
            a = state.assign(job)
            target = state.bin(a.bin)
            before = target.snapshot()
            target.insert(JobState(job, a.rounded_weight, job.proc))
            alive += 1
            run.rounded_weights[job.index] = a.rounded_weight
            run.bin_of[job.index] = a.bin
            run.arrivals.append(Arrival(t, job, a, before, target.snapshot()))
            run.events.append(Event(t, EventKind.RELEASE, job.index, a.bin))
        if alive == 0:
            if nxt == len(pending):
                break
            r = pending[nxt].release
            trace.append(Segment(t, r, None))
            t = r
            current = None
            continue

        key = select_bin(state, current)
        b = state.bins[key]
        top = b.top
        step = top.remaining
        stop = EventKind.COMPLETION
        if key.family is BinFamily.PROC and top.remaining > pow2(key.index):
            gap = top.remaining - pow2(key.index)
            if gap < step:
                step, stop = gap, EventKind.THRESHOLD
        if delta is not None and delta < step:
            step, stop = delta, EventKind.QUANTUM
        if nxt < len(pending) and pending[nxt].release - t < step:
            step, stop = pending[nxt].release - t, EventKind.RELEASE

        run.decisions.append(Decision(t, t + step, state.snapshot(), key, top.index))
        trace.append(Segment(t, t + step, top.index, key))
        b.jobs[-1] = top = top.processed(step)
        t += step
        current = key

        if top.remaining == 0:
            b.jobs.pop()
            alive -= 1
            trace.completions[top.index] = t
            run.events.append(Event(t, EventKind.COMPLETION, top.index, key))
        elif key.family is BinFamily.PROC and top.remaining == pow2(key.index) and top.remaining < top.job.proc:
            run.events.append(Event(t, EventKind.THRESHOLD, top.index, key))
        elif stop is EventKind.QUANTUM:
            run.events.append(Event(t, EventKind.QUANTUM, top.index, key))

    run.opened_bins = list(state.opened)
    run.cost = weighted_flow(trace, inst)
    return run


def simulate_exact(inst: Instance, kind) -> RunResult:
    """Event-driven run; only valid for policies whose scores are piecewise constant."""
    kind = SchedulerKind.parse(kind)
    if not kind.piecewise_constant:
        raise ValueError(
            f"exact mode is not available for {kind.name}: its scores decrease continuously; "
            "use quantum mode"
        )
    return _simulate(inst, kind, None, "exact")


def simulate_quantum(inst: Instance, kind, delta) -> RunResult:
    """Re-select the bin at least every ``delta`` time units (and at every event)."""
    kind = SchedulerKind.parse(kind)
    delta = as_rational(delta)
    if delta <= 0:
        raise ValueError(f"quantum length must be positive, got {delta}")
    return _simulate(inst, kind, delta, "quantum")


def default_delta(inst: Instance) -> Fraction:
    return min(j.proc for j in inst) / 16


def simulate(inst: Instance, kind, mode: str = "exact", delta=None) -> RunResult:
    kind = SchedulerKind.parse(kind)
    if mode == "exact":
        return simulate_exact(inst, kind)
    if mode == "quantum":
        return simulate_quantum(inst, kind, default_delta(inst) if delta is None else delta)
    raise ValueError(f"unknown mode {mode!r}")


# -- export ----------------------------------------------------------------


def write_segments_csv(run: RunResult, out: TextIO, decimal: bool = False) -> None:
    w = csv.writer(out, lineterminator="\n")
    header = ["start", "end", "job_index", "bin_family", "bin_index"]
    if decimal:
        header += ["start_decimal", "end_decimal"]
    w.writerow(header)
    for s in run.trace.segments:
        row = [format_rational(s.start), format_rational(s.end)]
        if s.job is None:
            row += ["idle", "", ""]
        else:
            row += [s.job, s.bin.family.label if s.bin else "", s.bin.index if s.bin else ""]
        if decimal:
            row += [f"{float(s.start):.6g}", f"{float(s.end):.6g}"]
        w.writerow(row)


def write_weight_csv(f: StepFunction, out: TextIO, decimal: bool = False, column: str = "W_alg") -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["time", column] + (["time_decimal", f"{column}_decimal"] if decimal else []))
    for t, v in f.breakpoints:
        row = [format_rational(t), format_rational(v)]
        if decimal:
            row += [f"{float(t):.6g}", f"{float(v):.6g}"]
        w.writerow(row)


def iter_states(run: RunResult) -> Iterator[tuple[Fraction, dict[BinKey, BinState]]]:
    """Every recorded bin configuration: decision points, segment midpoints, arrivals."""
    for a in run.arrivals:
        yield a.time, {a.before.key: a.before}
        yield a.time, {a.after.key: a.after}
    for d in run.decisions:
        yield d.start, d.bins
        yield (d.start + d.end) / 2, d.mid_state()
