import math
import random
from fractions import Fraction as F

import pytest

from wftsched.bins import (
    BinFamily,
    BinKey,
    BinState,
    JobState,
    bar_breakpoints,
    base,
    bin_bar_total,
    bin_height,
    contribution,
    job_breakpoints,
    mu_dens,
    mu_proc,
    mu_weight,
    prec_less,
    score,
)
from wftsched.harness import corpus_instance, run_policy
from wftsched.instance import Job
from wftsched.schedulers import SchedulerKind
from wftsched.verify import sampled_states

PROC, DENS, WEIGHT = BinFamily.PROC, BinFamily.DENS, BinFamily.WEIGHT


def js(index, w, p, remaining=None, release=0):
    return JobState(Job(index, release, p, w), F(w), F(p if remaining is None else remaining))


def test_prec_less_weight_class_first():
    assert prec_less(js(1, 2, 5), js(2, 4, 1))


def test_prec_less_density_breaks_class_tie():
    # same class lg w = 1; higher remaining density sits lower
    assert prec_less(js(1, 2, 6), js(2, 3, 1))


def test_prec_less_index_breaks_full_tie():
    a, b = js(1, 2, 2), js(2, 2, 2)
    assert prec_less(b, a)
    assert not prec_less(a, b)


def test_prec_less_rejects_self():
    a = js(1, 2, 2)
    with pytest.raises(ValueError):
        prec_less(a, a)


def test_prec_less_is_total_and_antisymmetric():
    rng = random.Random(3)
    jobs = [js(i, F(rng.randint(1, 32), 4), F(rng.randint(1, 32), 4)) for i in range(1, 40)]
    for a in jobs:
        for b in jobs:
            if a is not b:
                assert prec_less(a, b) != prec_less(b, a)


def test_insert_keeps_order():
    rng = random.Random(5)
    b = BinState(BinKey(PROC, 0))
    for i in range(1, 30):
        b.insert(js(i, F(rng.randint(1, 16), 2), F(rng.randint(1, 16), 2)))
    for lo, hi in zip(b.jobs, b.jobs[1:]):
        assert prec_less(lo, hi)


def test_base():
    b = BinState(BinKey(PROC, 0), [js(1, 1, 1), js(2, 2, 2), js(3, 4, 1)])
    assert base(b, b.jobs[0]) == 0
    assert base(b, b.jobs[2]) == 3


@pytest.mark.parametrize(
    "args, expected",
    [
        ((2, 3, 2, 1, 0), 1),
        ((2, 1, 2, 3, 0), 3),
        ((2, F(1, 2), 2, 3, 0), 0),
    ],
)
def test_mu_proc_examples(args, expected):
    assert mu_proc(*args) == expected


def test_mu_dens_example():
    assert mu_dens(0, F(15, 2), 3, F(3, 2), 4) == F(3, 2)


def test_mu_weight_examples():
    assert mu_weight(5, 4, 3, 1) == 3
    assert mu_weight(F(49, 10), 4, 3, 1) == 0


@pytest.mark.parametrize("f", [lambda: mu_proc(0, 1, 0, 1, 0), lambda: mu_dens(0, 1, 1, 0, 0), lambda: mu_weight(1, -1, 1, 0)])
def test_mu_rejects_nonpositive(f):
    with pytest.raises(ValueError):
        f()


def test_contribution_single_job_dens():
    b = BinState(BinKey(DENS, 0), [js(1, 3, 3, F(3, 2))])
    assert contribution(b, b.jobs[0], 3) == 1
    assert job_breakpoints(b.key, b.jobs[0], F(0)) == (2, F(7, 2))


def test_contribution_weight_bin_zero_at_base():
    b = BinState(BinKey(WEIGHT, 2), [js(1, 4, 1), js(2, 4, 5)])
    assert contribution(b, b.jobs[1], 4) == 0


def test_bar_total_two_job_proc():
    b = BinState(BinKey(PROC, 0), [js(1, 1, 1), js(2, 2, 2)])
    assert bin_bar_total(b, 2) == 2


def test_score_proc_top_below_threshold():
    b = BinState(BinKey(PROC, 2), [js(1, 2, 4), js(2, 4, 4, 3)])
    assert score(b) == 4
    assert bin_height(b) == 4


def test_score_dens_formula():
    # laid out by hand, bottom job first
    b = BinState(BinKey(DENS, 0), [js(1, 5, 5), js(2, 3, 3, F(3, 2))])
    assert score(b) == F(17, 2)
    assert bin_height(b) == F(17, 2)


def test_score_weight_is_total_weight():
    b = BinState(BinKey(WEIGHT, 2), [js(1, 4, 1), js(2, 4, 5)])
    assert score(b) == 8 == bin_height(b)


def test_score_empty_bin_raises():
    with pytest.raises(ValueError):
        score(BinState(BinKey(PROC, 0)))
    with pytest.raises(ValueError):
        bin_height(BinState(BinKey(PROC, 0)))


def _reachable_states(count=40, kinds=(SchedulerKind.PROC, SchedulerKind.DENS, SchedulerKind.WEIGHT)):
    for s in range(count):
        inst = corpus_instance(1000 + s, max_n=8)
        for kind in kinds:
            for _, b in sampled_states(run_policy(inst, kind)):
                yield b


def _grid_height(b: BinState, step: F) -> F:
    """Smallest grid point where the top job contributes everything (independent scan)."""
    top = b.top
    x = b.bases()[-1]  # nothing below the top job's own base
    while contribution(b, top, x) != top.remaining:
        x += step
    return x


def test_height_matches_grid_scan():
    checked = 0
    for b in _reachable_states(6):
        pts = bar_breakpoints(b) + [score(b)]
        den = 1
        for p in pts:
            den = math.lcm(den, p.denominator)
        if den > 64:
            continue
        h = _grid_height(b, F(1, den))
        assert h == bin_height(b) == score(b)
        checked += 1
    assert checked > 10


def test_bar_total_piecewise_linear_between_breakpoints():
    rng = random.Random(9)
    for b in _reachable_states(6):
        pts = [F(0)] + bar_breakpoints(b) + [b.total_weight * 2 + 1]
        for a, c in zip(pts, pts[1:]):
            if c - a <= 0:
                continue
            # on [a, c) each piece is affine: check three interior points are collinear
            xs = sorted(a + (c - a) * F(rng.randint(1, 99), 100) for _ in range(3))
            if len(set(xs)) < 3:
                continue
            ys = [bin_bar_total(b, x) for x in xs]
            assert (ys[1] - ys[0]) * (xs[2] - xs[1]) == (ys[2] - ys[1]) * (xs[1] - xs[0])


def test_bar_breakpoint_examples():
    assert bar_breakpoints(BinState(BinKey(PROC, 0))) == []
    assert bin_bar_total(BinState(BinKey(PROC, 0)), 5) == 0
    assert bar_breakpoints(BinState(BinKey(PROC, 0), [js(1, 4, 1)])) == [2, 4]


def test_weight_bin_two_equal_jobs():
    b = BinState(BinKey(WEIGHT, 3), [js(1, 8, 1), js(2, 8, 2)])
    assert score(b) == 16 == bin_height(b)


@pytest.mark.parametrize("remaining, expected", [(5, 4), (1, 2)])
def test_height_single_proc_job(remaining, expected):
    b = BinState(BinKey(PROC, 0), [js(1, 4, 5, remaining)])
    assert bin_height(b) == expected == score(b)


def test_bar_total_at_and_above_score_is_full_volume():
    for b in _reachable_states(6):
        s = score(b)
        for x in (s, s + F(1, 7), b.total_weight * 2 + 1):
            assert bin_bar_total(b, x) == b.total_remaining
