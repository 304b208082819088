import math

import numpy as np
import pytest

import icapath as ip


def logistic_data(n=200, p=10, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:3] = [2.0, -1.5, 1.0]
    prob = 1.0 / (1.0 + np.exp(-x @ beta))
    y = (rng.uniform(size=n) < prob).astype(float)
    return ip.Dataset(x, y)


def test_prox_values():
    assert ip.prox(ip.PenaltySpec.scad(), 0.8, 1.0, 1.0) == 0.0
    assert ip.prox(ip.PenaltySpec.scad(), 1.5, 1.0, 1.0) == pytest.approx(0.5)
    assert ip.prox(ip.PenaltySpec.l1(), 2.0, 0.5, 1.0) == pytest.approx(1.5)
    assert ip.penalty_value(ip.PenaltySpec.scad(3.7), 10.0, 1.0) == pytest.approx(2.35)


def test_invalid_inputs_raise_value_error():
    with pytest.raises(ValueError, match="SCAD requires a > 2"):
        ip.PenaltySpec.scad(1.5)
    with pytest.raises(ValueError):
        ip.Dataset(np.ones((3, 2)), np.ones(4))


def test_path_select_and_check():
    data = logistic_data()
    fam = ip.FamilySpec.logistic()
    cfg = ip.SolverConfig()
    cfg.nlambda = 40
    path = ip.ica_path(data, fam, ip.PenaltySpec.scad(), cfg)
    assert len(path) == 40
    assert path.coefficients.shape == (40, 10)
    assert path.total_ascent_violations() == 0
    assert np.all(path.coefficients[0] == 0.0)

    sel = ip.select_lambda(path, "bic", data, fam)
    chosen = path.coefficients[sel.chosen_index]
    assert set(np.flatnonzero(chosen)) >= {0, 1, 2}

    std = ip.standardize(data)
    k = sel.chosen_index
    report = ip.check_local_max(std, fam, ip.PenaltySpec.scad(), path.lambdas[k],
                                path.fitted_coefficients(k),
                                stationarity_tol=10 * cfg.tol)
    assert report.passes_nonstrict


def test_cross_validation_is_thread_invariant():
    data = logistic_data(seed=3)
    cfg = ip.SolverConfig()
    cfg.nlambda = 20
    a = ip.kfold_cv(data, ip.FamilySpec.logistic(), ip.PenaltySpec.l1(), cfg, folds=5, seed=4)
    b = ip.kfold_cv(data, ip.FamilySpec.logistic(), ip.PenaltySpec.l1(), cfg, folds=5, seed=4,
                    threads=2)
    assert a.scores == b.scores
    assert a.criterion == "cv"


def test_small_experiment():
    cfg = ip.logistic_study_config()
    cfg.replicates = 2
    cfg.test_size = 500
    out = ip.run_experiment(cfg)
    names = {m["method"] for m in out["methods"]}
    assert {"lasso", "oracle"} <= names
    for m in out["methods"]:
        assert m["failures"] == 0
        assert math.isfinite(m["pe"]["median"])
        assert m["optimality"]["ascent_violations"] == 0
