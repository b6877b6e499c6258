"""Runtime checks of the structural invariants and competitiveness bounds.

Every check is exact: rational equalities and inequalities, no tolerance.
Claims quantified over all bar heights ``x >= 0`` are reduced to finitely many
points.  All bar totals are piecewise linear with known breakpoints, so a
difference that is nonnegative at the start of every segment and at the left
limit of its end is nonnegative on the whole segment.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .bins import (
    BinFamily,
    BinKey,
    BinState,
    bar_breakpoints,
    bin_bar_total,
    bin_height,
    job_breakpoints,
    job_contributions,
    mu_dens,
    mu_for,
    mu_proc,
    mu_weight,
    score,
)
from .engine import EventKind, RunResult, integrate_step, weight_trace, weighted_flow
from .instance import InstanceStats, ceil_log2, floor_log2, format_rational, pow2
from .oracle import OracleResult, opt_weight_trace

GOODNESS_C = {BinFamily.PROC: Fraction(3), BinFamily.DENS: Fraction(10), BinFamily.WEIGHT: Fraction(1)}


@dataclass(frozen=True)
class Witness:
    seed: int | None
    time: Fraction | None
    x: Fraction | None
    jobs: tuple[int, ...]
    left: Fraction | None
    right: Fraction | None
    detail: str = ""

    def __str__(self):
        parts = [self.detail]
        for name in ("seed", "time", "x"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={format_rational(v) if isinstance(v, Fraction) else v}")
        if self.jobs:
            parts.append("jobs=" + ",".join(map(str, self.jobs)))
        if self.left is not None:
            parts.append(f"lhs={format_rational(self.left)} rhs={format_rational(self.right)}")
        return " ".join(p for p in parts if p)


@dataclass
class VerificationReport:
    check: str
    instances: int = 0
    checked: int = 0
    violations: list[Witness] = field(default_factory=list)
    flagged: list[Witness] = field(default_factory=list)
    max_ratio: Fraction | None = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def fail(self, witness: Witness):
        self.violations.append(witness)

    def observe_ratio(self, r: Fraction):
        if self.max_ratio is None or r > self.max_ratio:
            self.max_ratio = r

    def merge(self, other: "VerificationReport") -> "VerificationReport":
        self.instances += other.instances
        self.checked += other.checked
        self.violations.extend(other.violations)
        self.flagged.extend(other.flagged)
        if other.max_ratio is not None:
            self.observe_ratio(other.max_ratio)
        return self

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = f"{status} {self.check}: instances={self.instances} checks={self.checked} violations={len(self.violations)}"
        if self.max_ratio is not None:
            line += f" max_ratio={format_rational(self.max_ratio)} (~{float(self.max_ratio):.4f})"
        if self.flagged:
            line += f" flagged={len(self.flagged)}"
        return line


def reports_to_csv(reports: Iterable[VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["check", "instances", "violations", "max_ratio"])
    for r in reports:
        w.writerow([r.check, r.instances, len(r.violations), "" if r.max_ratio is None else format_rational(r.max_ratio)])
    return buf.getvalue()


@dataclass(frozen=True)
class GoodnessParams:
    family: BinFamily
    c: Fraction

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("goodness constant must be positive")

    @classmethod
    def default(cls, family: BinFamily) -> "GoodnessParams":
        return cls(family, GOODNESS_C[family])


# -- contribution axioms ---------------------------------------------------


def _mu_and_breaks(family: BinFamily, i: int):
    if family is BinFamily.PROC:
        return (lambda x, w, p, h: mu_proc(i, x, w, p, h),
                lambda w, p, h: (h + w / 2, h + w))
    if family is BinFamily.DENS:
        def breaks(w, p, h):
            kappa = h + pow2(floor_log2(w))
            return kappa, kappa + p / pow2(i)
        return (lambda x, w, p, h: mu_dens(i, x, w, p, h)), breaks
    return mu_weight, (lambda w, p, h: (h + w,))


def _rand_q(rng: random.Random, lo: int, hi: int, den: int = 16) -> Fraction:
    q = rng.randint(1, den)
    return Fraction(rng.randint(lo * q, hi * q), q)


def _rand_pos(rng: random.Random, hi: int = 16) -> Fraction:
    q = rng.randint(1, 16)
    return Fraction(rng.randint(1, hi * q), q)


def fuzz_contribution_axioms(family: BinFamily, i_range=(-4, 4), trials: int = 10_000, seed: int = 0) -> VerificationReport:
    """Draw random ``(x, w, p, h, i)`` and assert the six contribution axioms exactly."""
    family = BinFamily(family)
    rng = random.Random(seed)
    rep = VerificationReport(f"axioms[{family.label}]", instances=trials)

    def bad(axiom, x, w, p, h, i, lhs=None, rhs=None):
        rep.fail(Witness(seed, None, x, (), lhs, rhs, f"axiom {axiom} (w={w}, p={p}, h={h}, i={i})"))

    for _ in range(trials):
        i = rng.randint(i_range[0], i_range[1]) if family is not BinFamily.WEIGHT else 0
        mu, breaks = _mu_and_breaks(family, i)
        w, p = _rand_pos(rng), _rand_pos(rng)
        h = _rand_q(rng, 0, 20)
        bps = breaks(w, p, h)
        # land on a breakpoint a third of the time; those are where bugs live
        x = rng.choice(bps) if rng.random() < 1 / 3 else _rand_q(rng, 0, 40)
        y = mu(x, w, p, h)

        rep.checked += 6
        if not 0 <= y <= p:
            bad(1, x, w, p, h, i, y, p)
        x2 = x + _rand_q(rng, 0, 10)
        if mu(x2, w, p, h) < y:
            bad(2, x, w, p, h, i, mu(x2, w, p, h), y)
        below = h + w / 2 - Fraction(1, rng.choice([1, 10, 1000]))
        for xx in (x, below):
            if xx - h < w / 2 and mu(xx, w, p, h) != 0:
                bad(3, xx, w, p, h, i, mu(xx, w, p, h), Fraction(0))
        if y < p:
            p2 = max(y, Fraction(1, 64)) + _rand_q(rng, 0, 10)
            if mu(x, w, p2, h) != y:
                bad(4, x, w, p, h, i, mu(x, w, p2, h), y)
        pts = sorted(set(bps))
        for k, b in enumerate(pts):
            gap = pts[k + 1] - b if k + 1 < len(pts) else Fraction(1)
            # mu is affine on [b, next); extrapolate the right limit from two interior points
            m1, m2 = mu(b + gap / 3, w, p, h), mu(b + 2 * gap / 3, w, p, h)
            right_limit = 2 * m1 - m2
            if mu(b, w, p, h) != right_limit:
                bad(5, b, w, p, h, i, mu(b, w, p, h), right_limit)
        shift = _rand_q(rng, -10, 10)
        if mu(x + shift, w, p, h + shift) != y:
            bad(6, x, w, p, h, i, mu(x + shift, w, p, h + shift), y)
    return rep


# -- piecewise-linear dominance --------------------------------------------


def _segment_points(points: Iterable[Fraction]) -> list[Fraction]:
    return sorted({Fraction(0)} | {p for p in points if p >= 0})


def find_dominance_violation(
    upper: Callable[[Fraction], Fraction],
    lower: Callable[[Fraction], Fraction],
    points: Iterable[Fraction],
) -> tuple[Fraction, str, Fraction, Fraction] | None:
    """First ``x >= 0`` where ``upper(x) < lower(x)`` (or a left limit there), else None.

    Both functions must be affine on every segment between consecutive points and
    constant past the last one.
    """
    pts = _segment_points(points)
    for k, a in enumerate(pts):
        ua, la = upper(a), lower(a)
        if ua < la:
            return a, "at", ua, la
        if k + 1 < len(pts):
            b = pts[k + 1]
            m = (a + b) / 2
            ub, lb = 2 * upper(m) - ua, 2 * lower(m) - la
            if ub < lb:
                return b, "left-limit", ub, lb
    return None


def _support_points(bin: BinState) -> list[tuple[Fraction, Fraction]]:
    """Per job (bottom first): where gamma first turns positive, and where it becomes full.

    Each gamma is nondecreasing, right-continuous, and affine between the job's own
    breakpoints, so both infima sit on one of those breakpoints (or at 0).
    """
    mu = mu_for(bin.key)
    out = []
    for js, h in zip(bin.jobs, bin.bases()):
        w, p = js.rounded_weight, js.remaining
        cands = _segment_points(job_breakpoints(bin.key, js, h))
        positive = full = None
        for k, x in enumerate(cands):
            nxt = cands[k + 1] if k + 1 < len(cands) else x + 1
            g = mu(x, w, p, h)
            if positive is None and (g > 0 or mu((x + nxt) / 2, w, p, h) > 0):
                positive = x
            if full is None and g >= p:
                full = x
        out.append((positive, full))
    return out


def ordering_violation(bin: BinState) -> tuple[Fraction, int, int] | None:
    """Find x and J1 below J2 with gamma_J2(x) > 0 but gamma_J1(x) < p_t(J1).

    gamma_J1 < p_t(J1) exactly on ``[0, full_1)`` and gamma_J2 > 0 exactly on an
    up-set starting at ``positive_2``, so a witness exists iff
    ``positive_2 < full_1`` for some pair.
    """
    if len(bin) < 2:
        return None
    supports = _support_points(bin)
    worst_full, worst_pos = None, None  # largest "full" point among lower jobs so far
    for pos, (positive, full) in enumerate(supports):
        if worst_full is not None and positive < worst_full:
            return positive, bin.jobs[worst_pos].index, bin.jobs[pos].index
        if worst_full is None or full > worst_full:
            worst_full, worst_pos = full, pos
    return None


# -- state enumeration -----------------------------------------------------


def _state_key(b: BinState):
    return b.key, tuple((js.index, js.remaining) for js in b.jobs)


def sampled_states(run: RunResult) -> Iterator[tuple[Fraction, BinState]]:
    """Distinct bin configurations reached by the run.

    Consecutive decisions that keep processing the same job with no release in
    between form one stretch; each stretch contributes its starting state and
    its midpoint.  Arrival states (before and after insertion) are included.
    """
    seen = set()

    def emit(t, b):
        k = _state_key(b)
        if b and k not in seen:
            seen.add(k)
            yield t, b

    for a in run.arrivals:
        yield from emit(a.time, a.before)
        yield from emit(a.time, a.after)
    releases = {a.time for a in run.arrivals}
    decisions = run.decisions
    k = 0
    while k < len(decisions):
        first = decisions[k]
        end = first.end
        k += 1
        while (
            k < len(decisions)
            and decisions[k].bin == first.bin
            and decisions[k].job == first.job
            and decisions[k].start == end
            and end not in releases
        ):
            end = decisions[k].end
            k += 1
        for b in first.bins.values():
            yield from emit(first.start, b)
        half = (end - first.start) / 2
        b = first.bins[first.bin]
        mid = BinState(b.key, b.jobs[:-1] + [b.jobs[-1].processed(half)])
        yield from emit(first.start + half, mid)


# -- per-run checks --------------------------------------------------------


def check_goodness_at_arrivals(run: RunResult, params: GoodnessParams, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport(f"goodness[{params.family.label},c={params.c}]", instances=1)
    c = params.c
    for arr in run.arrivals:
        if arr.assignment.bin.family is not params.family:
            continue
        before, after = arr.before, arr.after
        w0 = arr.assignment.rounded_weight
        p0 = arr.job.proc
        rep.checked += 2
        hit = find_dominance_violation(
            lambda x: bin_bar_total(after, x),
            lambda x: bin_bar_total(before, x),
            bar_breakpoints(before) + bar_breakpoints(after),
        )
        if hit:
            x, how, lhs, rhs = hit
            rep.fail(Witness(seed, arr.time, x, (arr.job.index,), lhs, rhs, f"2a ({how}) in {after.key}"))
        shift = c * w0
        hit = find_dominance_violation(
            lambda x: bin_bar_total(after, x + shift),
            lambda x: bin_bar_total(before, x) + p0,
            bar_breakpoints(before) + [b - shift for b in bar_breakpoints(after)],
        )
        if hit:
            x, how, lhs, rhs = hit
            rep.fail(Witness(seed, arr.time, x, (arr.job.index,), lhs, rhs, f"2b ({how}) in {after.key}"))
    for t, b in sampled_states(run):
        if b.key.family is not params.family:
            continue
        rep.checked += 1
        hit = ordering_violation(b)
        if hit:
            x, lo, hi = hit
            rep.fail(Witness(seed, t, x, (lo, hi), None, None, f"property 1 in {b.key}"))
    return rep


def short_job_violations(b: BinState) -> list[str]:
    """Short-jobs uniqueness and the corollary weight bounds for one bin state."""
    out = []
    fam, i = b.key
    if fam is BinFamily.PROC:
        short = [js for js in b.jobs if js.remaining < pow2(i)]
        classes = {}
        for js in short:
            classes.setdefault(js.rounded_weight, []).append(js.index)
        out += [f"two short jobs of weight {w}: {ids}" for w, ids in classes.items() if len(ids) > 1]
        for x in sorted({js.rounded_weight for js in b.jobs}):
            ws = sum((js.rounded_weight for js in short if js.rounded_weight <= x), Fraction(0))
            if not ws < 2 * x:
                out.append(f"w(S)={ws} >= 2x for x={x}")
    elif fam is BinFamily.DENS:
        short = [js for js in b.jobs if js.current_density < pow2(i)]
        classes = {}
        for js in short:
            classes.setdefault(js.weight_class, []).append(js.index)
        out += [f"two low-density jobs in weight class {j}: {ids}" for j, ids in classes.items() if len(ids) > 1]
        for y in sorted({js.weight_class for js in b.jobs}):
            ws = sum((js.rounded_weight for js in short if js.weight_class <= y), Fraction(0))
            if not ws < 4 * pow2(y):
                out.append(f"w(S)={ws} >= 4*2^{y}")
    return out


def check_short_jobs(run: RunResult, family: BinFamily, seed: int | None = None) -> VerificationReport:
    family = BinFamily(family)
    rep = VerificationReport(f"short-jobs[{family.label}]", instances=1)
    for t, b in sampled_states(run):
        if b.key.family is not family:
            continue
        rep.checked += 1
        for msg in short_job_violations(b):
            rep.fail(Witness(seed, t, None, tuple(js.index for js in b.jobs), None, None, f"{b.key}: {msg}"))
    return rep


def check_ordering_invariance(run: RunResult, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport("ordering-invariance", instances=1)
    order: dict[BinKey, dict[tuple[int, int], bool]] = {}
    for t, b in sampled_states(run):
        rep.checked += 1
        seen = order.setdefault(b.key, {})
        ids = [js.index for js in b.jobs]
        for lo_pos, a in enumerate(ids):
            for c in ids[lo_pos + 1:]:
                pair, below = ((a, c), True) if a < c else ((c, a), False)
                prev = seen.setdefault(pair, below)
                if prev != below:
                    rep.fail(Witness(seed, t, None, (a, c), None, None, f"order flipped in {b.key}"))
    return rep


def check_score_height_equality(run: RunResult, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport("score-height", instances=1)
    for t, b in sampled_states(run):
        rep.checked += 1
        s, h = score(b), bin_height(b)
        if s != h:
            rep.fail(Witness(seed, t, None, tuple(js.index for js in b.jobs), s, h, f"score != height in {b.key}"))
    return rep


def check_top_job(run: RunResult, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport("top-job", instances=1)
    for d in run.decisions:
        rep.checked += 1
        if d.bins[d.bin].top.index != d.job:
            rep.fail(Witness(seed, d.start, None, (d.job,), None, None, f"processed non-top job in {d.bin}"))
    return rep


def check_work_conservation(run: RunResult, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport("work-conservation", instances=1)
    for s in run.trace.segments:
        if s.job is not None:
            continue
        rep.checked += 1
        alive = [j.index for j in run.instance if j.release <= s.start < run.trace.completions[j.index]]
        if alive:
            rep.fail(Witness(seed, s.start, None, tuple(alive), None, None, "idle while jobs are alive"))
    return rep


def check_threshold_once(run: RunResult, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport("threshold-once", instances=1)
    counts: dict[int, int] = {}
    for e in run.threshold_events():
        counts[e.job] = counts.get(e.job, 0) + 1
        rep.checked += 1
        if counts[e.job] > 1:
            rep.fail(Witness(seed, e.time, None, (e.job,), None, None, "second threshold crossing"))
    return rep


def check_flow_identity(run: RunResult, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport("flow-identity", instances=1, checked=1)
    lhs = weighted_flow(run.trace, run.instance)
    rhs = integrate_step(weight_trace(run, run.instance, "original"))
    if lhs != rhs or run.cost != lhs:
        rep.fail(Witness(seed, None, None, (), lhs, rhs, "sum w(c-r) != integral of W"))
    return rep


def check_local_competitiveness(run: RunResult, opt: OracleResult, c, seed: int | None = None) -> VerificationReport:
    """Pointwise ``W(t) <= 2c * (#nonempty bins at t) * W*(t)`` on the rounded instance."""
    c = Fraction(c)
    rounded = run.rounded_instance()
    if opt.best.instance != rounded:
        raise ValueError("oracle was not solved on the run's rounded instance")
    rep = VerificationReport(f"local-competitiveness[{run.kind.name if run.kind else '?'},c={c}]", instances=1)
    alg_w = weight_trace(run, rounded, "original")
    opt_w = opt_weight_trace(opt, rounded)
    for t in sorted(set(alg_w.times) | set(opt_w.times)):
        w, ws = alg_w(t), opt_w(t)
        bins = run.nonempty_bins_at(t)
        rep.checked += 1
        if ws == 0:
            if w > 0:
                rep.flagged.append(Witness(seed, t, None, (), w, ws, "optimum idle while algorithm busy"))
            continue
        rep.observe_ratio(w / ws)
        if w > 2 * c * bins * ws:
            rep.fail(Witness(seed, t, None, (), w, 2 * c * bins * ws, f"W(t) > 2c*{bins}*W*(t)"))
    return rep


def bin_count_bound(stats: InstanceStats) -> int:
    return 3 * (ceil_log2(stats.min_ratio) + 1)


def check_bin_count(run: RunResult, stats: InstanceStats, seed: int | None = None) -> VerificationReport:
    rep = VerificationReport("bin-count", instances=1, checked=1)
    bound = bin_count_bound(stats)
    opened = len(set(run.opened_bins))
    rep.observe_ratio(Fraction(opened))
    if opened > bound:
        rep.fail(Witness(seed, None, None, (), Fraction(opened), Fraction(bound), "opened more bins than allowed"))
    return rep


def spontaneous_switches(run: RunResult) -> list[tuple[Fraction, BinKey, BinKey]]:
    """(time, from, to) for bin switches not caused by a release or completion."""
    other = {e.time for e in run.events if e.kind in (EventKind.RELEASE, EventKind.COMPLETION)}
    out = []
    for prev, d in zip(run.decisions, run.decisions[1:]):
        if d.start not in other and d.bin != prev.bin:
            out.append((d.start, prev.bin, d.bin))
    return out
