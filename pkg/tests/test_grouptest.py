import numpy as np
import pytest

from nnlad import oracle
from nnlad.expander import expander_error_bound, expansion_theta
from nnlad.grouptest import (CallReport, ContaminationModel, PcrNoiseModel, PoolingDesign,
                             call_positives, decode_panel, individual_testing_baseline,
                             random_loads, simulate_panel)
from nnlad.linalg import SparseWalkMatrix
from nnlad.solvers import SolverParams, nnlad_solve


@pytest.fixture
def design():
    return PoolingDesign.random(100, 32, 8, seed=0)


def test_design_conservation(design):
    assert (design.persons, design.kits, design.splits) == (100, 32, 8)
    with pytest.raises(TypeError):
        PoolingDesign(np.eye(3))


def test_simulation_parts(design):
    x = random_loads(100, 2, 1)
    y, parts = simulate_panel(design, x, seed=1)
    assert np.array_equal(y, design.matrix.matvec(x))
    y, parts = simulate_panel(design, x, ContaminationModel(k_con=1), seed=2)
    d = y - parts["Ax"]
    assert np.count_nonzero(d) == 1 and d.min() >= 0
    y, parts = simulate_panel(design, x, pcr=PcrNoiseModel(1e-3), seed=3)
    assert np.abs(parts["e_pcr"]).sum() == pytest.approx(1e-3 * np.abs(parts["Ax"]).sum(), rel=1e-14)
    with pytest.raises(ValueError):
        simulate_panel(design, -x)


def test_zero_observation_no_positives(design):
    rep = decode_panel(design, np.zeros(32), truth=np.zeros(100))
    assert rep.called_positive.size == 0 and rep.exact


def test_noiseless_exact_calls(design):
    for seed in range(10):
        x = random_loads(100, 2, seed)
        y, _ = simulate_panel(design, x, seed=seed)
        rep = decode_panel(design, y, truth=x)
        assert rep.exact and rep.status == "certified"
        # any threshold strictly between 0 and the smallest load works
        lo = x[x > 0].min()
        for lam in (1e-6 * lo, 0.5 * lo, 0.99 * lo):
            assert call_positives(rep.estimate, lam, truth=x).exact


def test_threshold_monotonicity():
    rng = np.random.default_rng(0)
    est = np.abs(rng.normal(size=50))
    truth = np.where(rng.random(50) < 0.3, 1.0, 0.0)
    prev = None
    for lam in np.linspace(0, 3, 30):
        rep = call_positives(est, lam, truth=truth)
        if prev is not None:
            assert rep.false_positives <= prev.false_positives
            assert rep.false_negatives >= prev.false_negatives
        prev = rep


def test_contamination_error_within_bound():
    # small panel whose expansion constant can be enumerated exactly
    design = PoolingDesign.random(8, 40, 4, seed=0)
    A = design.matrix
    theta = expansion_theta(A, 2).theta
    assert theta < 1 / 6
    x = np.zeros(8)
    x[3] = 50.0
    y, parts = simulate_panel(design, x, ContaminationModel(k_con=1, median=0.5, spread=0.0), seed=1)
    est = nnlad_solve(A, y, SolverParams(max_iters=200_000)).estimate
    err = np.abs(est - x).sum()
    assert err <= expander_error_bound(theta, 0.0, np.abs(parts["e_con"]).sum()) + 1e-6
    assert np.flatnonzero(est > 1e-3 * est.max()).tolist() == [3]


def test_individual_baseline():
    x = random_loads(20, 3, 0)
    rep = individual_testing_baseline(x, seed=0)
    assert rep.exact and rep.estimate.size == x.size
    con = ContaminationModel(k_con=20, median=10.0, spread=0.0)
    rep = individual_testing_baseline(x, con, seed=0, threshold=1.0)
    assert rep.false_positives == 17
