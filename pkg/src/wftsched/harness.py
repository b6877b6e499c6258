"""Seeded corpora and the batch verification suites built on them."""

from __future__ import annotations

import logging
import random
from fractions import Fraction
from typing import Callable

from .bins import BinFamily
from .engine import RunResult, default_delta, simulate, simulate_exact, simulate_quantum
from .instance import Instance, ceil_log2, generate_instance, instance_stats
from .oracle import brute_force_opt, hdf_baseline
from .schedulers import SchedulerKind
from .verify import (
    GOODNESS_C,
    GoodnessParams,
    VerificationReport,
    Witness,
    check_bin_count,
    check_flow_identity,
    check_goodness_at_arrivals,
    check_local_competitiveness,
    check_ordering_invariance,
    check_score_height_equality,
    check_short_jobs,
    check_threshold_once,
    check_top_job,
    check_work_conservation,
    fuzz_contribution_axioms,
    spontaneous_switches,
)

log = logging.getLogger(__name__)

F = Fraction

# (processing range, weight range, release range); cycled through by seed
PROFILES = [
    ((F(1, 2), F(8)), (F(1, 2), F(8)), (F(0), F(10))),
    ((F(1, 8), F(16)), (F(1), F(2)), (F(0), F(20))),
    ((F(1), F(2)), (F(1, 8), F(16)), (F(0), F(5))),
    ((F(1, 4), F(4)), (F(1, 4), F(4)), (F(0), F(0))),
    ((F(1, 8), F(8)), (F(1, 8), F(8)), (F(0), F(3))),
    ((F(2), F(3)), (F(3), F(4)), (F(0), F(12))),
]


def corpus_instance(seed: int, max_n: int = 20, max_den: int = 8) -> Instance:
    rng = random.Random(seed)
    n = rng.randint(1, max_n)
    p_range, w_range, r_range = PROFILES[rng.randrange(len(PROFILES))]
    return generate_instance(n, seed, p_range, w_range, r_range, max_den=max_den)


def corpus(count: int, seed: int = 0, max_n: int = 20) -> list[tuple[int, Instance]]:
    """``count`` instances whose seeds are ``seed, seed+1, ...``."""
    return [(s, corpus_instance(s, max_n)) for s in range(seed, seed + count)]


KIND_FAMILY = {
    SchedulerKind.PROC: BinFamily.PROC,
    SchedulerKind.DENS: BinFamily.DENS,
    SchedulerKind.WEIGHT: BinFamily.WEIGHT,
}


def run_policy(inst: Instance, kind: SchedulerKind) -> RunResult:
    """Exact mode where it is available, quantum with the default quantum otherwise."""
    return simulate(inst, kind, "exact" if kind.piecewise_constant else "quantum")


# -- suites ----------------------------------------------------------------


def suite_axioms(trials: int = 10_000, seed: int = 1) -> list[VerificationReport]:
    return [fuzz_contribution_axioms(fam, (-4, 4), trials, seed) for fam in BinFamily]


def suite_goodness(kind, instances: int = 500, seed: int = 2, c=None) -> list[VerificationReport]:
    kind = SchedulerKind.parse(kind)
    families = [KIND_FAMILY[kind]] if kind in KIND_FAMILY else list(BinFamily)
    reports = {fam: VerificationReport(f"goodness[{kind.name},{fam.label},c={c if c is not None else GOODNESS_C[fam]}]") for fam in families}
    for s, inst in corpus(instances, seed):
        run = run_policy(inst, kind)
        for fam in families:
            params = GoodnessParams(fam, F(c) if c is not None else GOODNESS_C[fam])
            reports[fam].merge(check_goodness_at_arrivals(run, params, seed=s))
    return list(reports.values())


def suite_structure(kind, instances: int = 500, seed: int = 2) -> list[VerificationReport]:
    kind = SchedulerKind.parse(kind)
    names = ["short-jobs[proc]", "short-jobs[dens]", "ordering-invariance", "score-height", "top-job",
             "work-conservation", "threshold-once"]
    reports = {n: VerificationReport(f"{n}[{kind.name}]") for n in names}
    for s, inst in corpus(instances, seed):
        run = run_policy(inst, kind)
        reports["short-jobs[proc]"].merge(check_short_jobs(run, BinFamily.PROC, s))
        reports["short-jobs[dens]"].merge(check_short_jobs(run, BinFamily.DENS, s))
        reports["ordering-invariance"].merge(check_ordering_invariance(run, s))
        reports["score-height"].merge(check_score_height_equality(run, s))
        reports["top-job"].merge(check_top_job(run, s))
        reports["work-conservation"].merge(check_work_conservation(run, s))
        reports["threshold-once"].merge(check_threshold_once(run, s))
    return list(reports.values())


def suite_flow(instances: int = 500, seed: int = 2, oracle_instances: int = 50) -> list[VerificationReport]:
    rep = VerificationReport("flow-identity")
    for s, inst in corpus(instances, seed):
        for kind in SchedulerKind:
            rep.merge(check_flow_identity(run_policy(inst, kind), s))
        rep.merge(check_flow_identity(hdf_baseline(inst), s))
    for s, inst in corpus(oracle_instances, seed, max_n=5):
        rep.merge(check_flow_identity(brute_force_opt(inst).best, s))
    return [rep]


COMPETITIVE_C = {SchedulerKind.PROC: F(3), SchedulerKind.DENS: F(10), SchedulerKind.COMBINED: F(10)}


def relevant_ratio(kind: SchedulerKind, inst: Instance) -> Fraction:
    st = instance_stats(inst)
    return {SchedulerKind.PROC: st.p_ratio, SchedulerKind.DENS: st.d_ratio,
            SchedulerKind.WEIGHT: st.w_ratio, SchedulerKind.COMBINED: st.min_ratio}[kind]


def end_to_end_bound(kind: SchedulerKind, inst: Instance, c=None) -> Fraction:
    """``2 * 2c * (ceil(log2 R) + 1)``: rounding factor times the local bound."""
    c = COMPETITIVE_C[kind] if c is None else F(c)
    return 2 * 2 * c * (ceil_log2(relevant_ratio(kind, inst)) + 1)


def combined_log_bound(inst: Instance) -> Fraction:
    return F(60 * (ceil_log2(instance_stats(inst).min_ratio) + 1))


def suite_competitive(instances: int = 200, seed: int = 3, max_n: int = 5) -> list[VerificationReport]:
    """Local competitiveness on rounded instances and end-to-end cost ratios."""
    local = {k: VerificationReport(f"local-competitiveness[{k.name},c={c}]") for k, c in COMPETITIVE_C.items()}
    ratio = {k: VerificationReport(f"end-to-end-ratio[{k.name}]") for k in COMPETITIVE_C}
    bound60 = VerificationReport("combined-60-bound")
    for s, inst in corpus(instances, seed, max_n=max_n):
        opt = brute_force_opt(inst)
        for kind, c in COMPETITIVE_C.items():
            run = run_policy(inst, kind)
            rounded_opt = brute_force_opt(run.rounded_instance())
            local[kind].merge(check_local_competitiveness(run, rounded_opt, c, seed=s))
            r = run.cost / opt.cost
            rep = ratio[kind]
            rep.instances += 1
            rep.checked += 1
            rep.observe_ratio(r)
            bound = end_to_end_bound(kind, inst)
            if r > bound:
                rep.fail(Witness(s, None, None, (), r, bound, "ALG/OPT above 2*2c*(ceil(log R)+1)"))
            if kind is SchedulerKind.COMBINED:
                bound60.instances += 1
                bound60.checked += 1
                bound60.observe_ratio(r)
                if r > combined_log_bound(inst):
                    bound60.fail(Witness(s, None, None, (), r, combined_log_bound(inst), "above 60(ceil(log min)+1)"))
    return list(local.values()) + list(ratio.values()) + [bound60]


def delta_ladder(inst: Instance, steps: int = 5) -> list[Fraction]:
    """Quanta ``p_min, p_min/2, ..., p_min/16`` for the default ``steps``."""
    p_min = min(j.proc for j in inst)
    return [p_min / 2**k for k in range(steps)]


def suite_convergence(instances: int = 50, seed: int = 4, kind=SchedulerKind.PROC) -> list[VerificationReport]:
    kind = SchedulerKind.parse(kind)
    mono = VerificationReport(f"quantum-monotone[{kind.name}]")
    close = VerificationReport(f"quantum-within-1%[{kind.name}]")
    for s, inst in corpus(instances, seed):
        exact = simulate_exact(inst, kind).cost
        diffs = [abs(simulate_quantum(inst, kind, d).cost - exact) for d in delta_ladder(inst)]
        mono.instances += 1
        close.instances += 1
        mono.checked += len(diffs) - 1
        close.checked += 1
        for a, b in zip(diffs, diffs[1:]):
            if b > a:
                mono.fail(Witness(s, None, None, (), b, a, "difference grew after halving the quantum"))
        rel = diffs[-1] / exact
        close.observe_ratio(rel)
        if rel > F(1, 100):
            close.fail(Witness(s, None, None, (), rel, F(1, 100), "relative difference at p_min/16"))
    return [mono, close]


def spontaneous_instance() -> Instance:
    return Instance.from_tuples([(0, 6, 3), (0, F(3, 2), F(3, 2)), (0, F(6, 5), F(3, 4))])


def suite_preemption() -> list[VerificationReport]:
    run = simulate_exact(spontaneous_instance(), SchedulerKind.PROC)
    rep = VerificationReport("spontaneous-preemption", instances=1, checked=1)
    switches = spontaneous_switches(run)
    thresholds = {e.time for e in run.threshold_events()}
    first = switches[0] if switches else None
    if first is None or first[0] != 2 or 2 not in thresholds:
        rep.fail(Witness(None, first[0] if first else None, None, (), None, None,
                         f"expected a threshold-driven switch at t=2, got {switches}"))
    return [rep]


def uniform_instance(n: int, seed: int) -> Instance:
    rng = random.Random(seed)
    r_vals = [F(rng.randint(0, 40), 4) for _ in range(n)]
    p, w = F(rng.randint(1, 32), rng.randint(1, 8)), F(rng.randint(1, 32), rng.randint(1, 8))
    return Instance.from_tuples([(r, p, w) for r in r_vals])


def suite_bincount(instances: int = 500, seed: int = 2) -> list[VerificationReport]:
    bound_rep = VerificationReport("bin-count-bound")
    uniform_rep = VerificationReport("bin-count-uniform")
    for s, inst in corpus(instances, seed):
        run = run_policy(inst, SchedulerKind.COMBINED)
        bound_rep.merge(check_bin_count(run, instance_stats(inst), s))
    for s in range(seed, seed + 50):
        inst = uniform_instance(1 + s % 12, s)
        run = run_policy(inst, SchedulerKind.COMBINED)
        uniform_rep.instances += 1
        uniform_rep.checked += 1
        if len(run.opened_bins) != 3:
            uniform_rep.fail(Witness(s, None, None, (), F(len(run.opened_bins)), F(3), "uniform instance opened != 3 bins"))
    return [bound_rep, uniform_rep]


SUITES: dict[str, Callable[..., list[VerificationReport]]] = {
    "axioms": suite_axioms,
    "goodness": suite_goodness,
    "structure": suite_structure,
    "flow": suite_flow,
    "competitive": suite_competitive,
    "convergence": suite_convergence,
    "preemption": suite_preemption,
    "bincount": suite_bincount,
}
