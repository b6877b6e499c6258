from fractions import Fraction as F

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from wftsched.estimators import HDFScheduler, OnlineScheduler, OptimalScheduler, check_instance, competitive_ratio
from wftsched.instance import Instance

ROWS = [(0, 4, 1), (0, 1, 4)]


def test_params_round_trip():
    est = OnlineScheduler(algorithm="d", delta="1/8")
    assert est.get_params() == {"algorithm": "d", "mode": "auto", "delta": "1/8"}
    c = clone(est).set_params(algorithm="w")
    assert c.algorithm == "w" and est.algorithm == "d"


def test_fit_predict_two_jobs():
    est = OnlineScheduler().fit(ROWS)
    assert est.cost_ == 9
    assert est.predict(ROWS) == [5, 1]
    assert est.score(ROWS) == -9
    assert est.flow_time() == 9


def test_auto_mode_uses_quantum_for_dens():
    est = OnlineScheduler(algorithm="d").fit(ROWS)
    assert est.run_.mode == "quantum" and est.run_.delta == F(1, 16)


def test_combined_reports_opened_bins():
    est = OnlineScheduler(algorithm="min").fit(ROWS)
    assert len(est.opened_bins_) >= 3


def test_not_fitted():
    with pytest.raises(NotFittedError):
        OnlineScheduler().flow_time()


def test_check_instance_variants():
    assert len(check_instance([(3, 0, 1, 1), (7, 1, 2, 2)])) == 2
    inst = Instance.from_tuples(ROWS)
    assert check_instance(inst) is inst
    with pytest.raises(ValueError):
        check_instance([])
    with pytest.raises(ValueError):
        check_instance([(0, 1)])
    with pytest.raises(ValueError):
        check_instance([(0, 1, 1), (0, 1, 1, 1)])


def test_optimal_and_hdf():
    opt = OptimalScheduler().fit(ROWS)
    assert opt.cost_ == 9 and opt.schedules_explored_ > 0
    assert HDFScheduler().fit(ROWS).cost_ == 9
    assert competitive_ratio(OnlineScheduler(), ROWS) == 1
