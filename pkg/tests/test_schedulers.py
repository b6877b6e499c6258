import random
from fractions import Fraction as F

import pytest

from wftsched.bins import BinFamily, BinKey, JobState, score
from wftsched.instance import Job, floor_log2
from wftsched.schedulers import (
    SchedulerKind,
    SchedulerState,
    assign_combined,
    assign_dens,
    assign_proc,
    assign_weight,
    round_weight_up,
    select_bin,
)

P, D, W = BinFamily.PROC, BinFamily.DENS, BinFamily.WEIGHT


def test_assign_proc_example():
    a = assign_proc(Job(1, 0, 5, 3))
    assert a.bin == BinKey(P, 2) and a.rounded_weight == 4


def test_assign_dens_example():
    a = assign_dens(Job(1, 0, 1, 3))
    assert a.bin == BinKey(D, -2) and a.rounded_weight == 4


def test_assign_weight_power_of_two_doubles():
    a = assign_weight(Job(1, 0, 1, 4))
    assert a.bin == BinKey(W, 3) and a.rounded_weight == 8


def test_combined_first_and_second_job():
    state = SchedulerState(SchedulerKind.COMBINED)
    a = assign_combined(Job(1, 0, 5, 3), state)
    assert a.bin == BinKey(W, 2) and a.rounded_weight == 4
    assert set(a.newly_opened) == {BinKey(P, 2), BinKey(D, 0), BinKey(W, 2)}
    b = assign_combined(Job(2, 0, 16, 12), state)
    assert b.bin == BinKey(D, 0) and b.rounded_weight == 16
    assert b.newly_opened == ()


def test_combined_prefers_proc_bin():
    state = SchedulerState(SchedulerKind.COMBINED)
    assign_combined(Job(1, 0, 5, 3), state)
    a = assign_combined(Job(2, 0, 6, 100), state)
    assert a.bin == BinKey(P, 2) and a.rounded_weight == 128


def test_combined_requires_combined_state():
    with pytest.raises(ValueError):
        assign_combined(Job(1, 0, 1, 1), SchedulerState(SchedulerKind.PROC))


def test_rounding_factors():
    rng = random.Random(17)
    for _ in range(10_000):
        j = Job(1, 0, F(rng.randint(1, 4096), rng.randint(1, 64)), F(rng.randint(1, 4096), rng.randint(1, 64)))
        for a in (assign_proc(j), assign_weight(j)):
            assert j.weight < a.rounded_weight <= 2 * j.weight
            assert a.rounded_weight == 2 ** (floor_log2(a.rounded_weight))
        d = assign_dens(j)
        assert j.weight <= d.rounded_weight < 2 * j.weight
        assert j.proc / d.rounded_weight == F(2) ** d.bin.index
        assert round_weight_up(j.weight) == assign_proc(j).rounded_weight


@pytest.mark.parametrize("name, kind", [("p", SchedulerKind.PROC), ("dens", SchedulerKind.DENS),
                                        ("W", SchedulerKind.WEIGHT), ("min", SchedulerKind.COMBINED),
                                        (SchedulerKind.PROC, SchedulerKind.PROC)])
def test_kind_parse(name, kind):
    assert SchedulerKind.parse(name) is kind


def test_kind_parse_rejects_unknown():
    with pytest.raises(ValueError):
        SchedulerKind.parse("x")


def _two_bin_state():
    state = SchedulerState(SchedulerKind.PROC)
    # A_2: weights 2 and 4, top has p_t = 3 <= 4 -> score 6 - 2 = 4
    b2 = state.bin(BinKey(P, 2))
    b2.insert(JobState(Job(1, 0, 4, 1), F(2), F(4)))
    b2.insert(JobState(Job(2, 0, 4, 3), F(4), F(3)))
    # A_0: single job weight 8, p_t = 1 <= 1 -> score 8 - 4 = 4
    state.bin(BinKey(P, 0)).insert(JobState(Job(3, 0, 1, 7), F(8), F(1)))
    return state


def test_select_bin_tie_sticks_with_current():
    state = _two_bin_state()
    assert [score(state.bins[k]) for k in (BinKey(P, 2), BinKey(P, 0))] == [4, 4]
    assert select_bin(state, BinKey(P, 0)) == BinKey(P, 0)
    assert select_bin(state, BinKey(P, 2)) == BinKey(P, 2)


def test_select_bin_tie_without_current_takes_smallest_key():
    assert select_bin(_two_bin_state()) == BinKey(P, 0)


def test_select_bin_strict_max_wins_over_current():
    state = _two_bin_state()
    state.bin(BinKey(P, 3)).insert(JobState(Job(4, 0, 9, 20), F(32), F(9)))
    assert select_bin(state, BinKey(P, 0)) == BinKey(P, 3)


def test_select_bin_empty():
    assert select_bin(SchedulerState(SchedulerKind.PROC)) is None


def test_release_places_job_in_assigned_bin():
    for kind in (SchedulerKind.PROC, SchedulerKind.DENS, SchedulerKind.WEIGHT, SchedulerKind.COMBINED):
        state = SchedulerState(kind)
        rng = random.Random(4)
        for i in range(1, 30):
            j = Job(i, 0, F(rng.randint(1, 64), 4), F(rng.randint(1, 64), 4))
            a, js = state.release(j)
            assert js in state.bins[a.bin].jobs
            assert js.rounded_weight == a.rounded_weight
        if kind is SchedulerKind.COMBINED:
            # every opened key lies in the open set and bins exist only for opened keys
            assert set(state.opened) == state.open_keys
            assert set(state.bins) <= state.open_keys
