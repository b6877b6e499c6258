"""scikit-learn style wrappers around the policies and the oracle.

``fit`` runs the schedule on an instance and stores the outcome in trailing
underscore attributes; ``predict`` returns completion times in input row
order.  Parameters go through ``get_params``/``set_params`` like any other
estimator, so the policies drop into grid searches and ``clone``.
"""

from __future__ import annotations

from fractions import Fraction

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .engine import RunResult, default_delta, simulate
from .instance import Instance, Job, as_rational
from .oracle import DEFAULT_LIMIT, brute_force_opt, hdf_baseline
from .schedulers import SchedulerKind


def check_instance(X) -> Instance:
    """Accept an ``Instance`` or rows of ``(release, proc, weight)``.

    Rows may also carry an explicit leading job index:
    ``(index, release, proc, weight)``.  Every number is converted exactly.
    """
    if isinstance(X, Instance):
        inst = X
    else:
        rows = [list(r) for r in X]
        if not rows:
            raise ValueError("instance has no jobs")
        widths = {len(r) for r in rows}
        if widths == {3}:
            inst = Instance.from_tuples((as_rational(r), as_rational(p), as_rational(w)) for r, p, w in rows)
        elif widths == {4}:
            inst = Instance(Job(int(i), as_rational(r), as_rational(p), as_rational(w)) for i, r, p, w in rows)
        else:
            raise ValueError(f"rows must have 3 (release, proc, weight) or 4 columns, got widths {sorted(widths)}")
    if len(inst) == 0:
        raise ValueError("instance has no jobs")
    return inst


class _ScheduleEstimator(BaseEstimator):
    def _schedule(self, inst: Instance) -> RunResult:
        raise NotImplementedError

    def fit(self, X, y=None):
        inst = check_instance(X)
        run = self._schedule(inst)
        self.instance_ = inst
        self.run_ = run
        self.cost_ = run.cost
        self.completion_times_ = dict(run.trace.completions)
        return self

    def predict(self, X) -> list[Fraction]:
        """Completion time of every job, in the order the jobs were given."""
        inst = check_instance(X)
        self.fit(inst)
        if isinstance(X, Instance):
            order = [j.index for j in X.jobs]
        else:
            order = [j.index for j in sorted(inst.jobs, key=lambda j: j.index)]
        return [self.completion_times_[i] for i in order]

    def score(self, X, y=None) -> Fraction:
        """Negated weighted flow time, so that larger is better."""
        return -self.fit(X).cost_

    def flow_time(self) -> Fraction:
        check_is_fitted(self, "run_")
        return self.cost_


class OnlineScheduler(_ScheduleEstimator):
    """One of the bin policies: ``"p"``, ``"d"``, ``"w"`` or ``"min"``.

    ``mode="auto"`` picks exact simulation when the policy allows it and
    quantum mode (``delta`` or the smallest processing time / 16) otherwise.
    """

    def __init__(self, algorithm="p", mode="auto", delta=None):
        self.algorithm = algorithm
        self.mode = mode
        self.delta = delta

    def _schedule(self, inst):
        kind = SchedulerKind.parse(self.algorithm)
        mode = self.mode
        if mode == "auto":
            mode = "exact" if kind.piecewise_constant else "quantum"
        delta = None
        if mode == "quantum":
            delta = as_rational(self.delta) if self.delta is not None else default_delta(inst)
        return simulate(inst, kind, mode, delta)

    @property
    def opened_bins_(self):
        check_is_fitted(self, "run_")
        return list(self.run_.opened_bins)


class OptimalScheduler(_ScheduleEstimator):
    """Brute-force optimum; refuses instances with more than ``limit`` jobs."""

    def __init__(self, limit=DEFAULT_LIMIT, memoize=True):
        self.limit = limit
        self.memoize = memoize

    def _schedule(self, inst):
        result = brute_force_opt(inst, self.limit, self.memoize)
        self.schedules_explored_ = result.schedules_explored
        return result.best


class HDFScheduler(_ScheduleEstimator):
    def _schedule(self, inst):
        return hdf_baseline(inst)


def competitive_ratio(estimator, X, limit=DEFAULT_LIMIT) -> Fraction:
    """Cost of ``estimator`` on ``X`` over the brute-force optimum."""
    inst = check_instance(X)
    return estimator.fit(inst).cost_ / OptimalScheduler(limit=limit).fit(inst).cost_
