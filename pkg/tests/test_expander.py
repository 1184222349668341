import itertools
import math

import numpy as np
import pytest
from scipy import stats

from nnlad import oracle
from nnlad.expander import (EnumerationBudgetExceeded, expander_error_bound, expansion_theta,
                            generate_bernoulli, generate_dlrbg, mplus_evaluate,
                            nsp_bruteforce_check, rnsp_constants, rnsp_error_bound)
from nnlad.linalg import SparseWalkMatrix
from nnlad.verify import worked_example_matrix


def test_generation_deterministic_and_valid():
    A = generate_dlrbg(100, 20, 5, seed=9)
    assert A == generate_dlrbg(100, 20, 5, seed=9)
    assert A != generate_dlrbg(100, 20, 5, seed=10)
    assert A.col_rows.shape == (100, 5)
    with pytest.raises(ValueError):
        generate_dlrbg(10, 4, 5)


def test_column_subsets_uniform():
    # each of the C(5,2)=10 subsets should be equally likely
    A = generate_dlrbg(20000, 5, 2, seed=0)
    codes = A.col_rows[:, 0] * 5 + A.col_rows[:, 1]
    _, counts = np.unique(codes, return_counts=True)
    assert counts.size == 10
    assert stats.chisquare(counts).pvalue > 1e-4


def test_bernoulli_entries():
    B = generate_bernoulli(30, 10, seed=1)
    assert set(np.unique(B.data)) <= {0.0, 1.0}
    assert B.shape == (10, 30)


def test_worked_example_theta():
    A = worked_example_matrix()
    st2 = expansion_theta(A, 2)
    assert st2.theta == 0.25 and st2.rho is None and st2.tau_rnsp is None
    st1 = expansion_theta(A, 1)
    assert st1.theta == 0.0 and st1.rho == 0.0 and st1.tau_rnsp == 1.0
    assert st2.to_json(kappa=1.0) == {"theta": 0.25, "rho": None, "tau": None, "kappa": 1.0, "S": 2}


def test_theta_matches_explicit_unions(backend):
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = generate_dlrbg(9, 7, 3, seed=rng)
        for S in (1, 2, 3):
            ref = 0.0
            for s in range(1, S + 1):
                for T in itertools.combinations(range(9), s):
                    R = set(A.col_rows[list(T)].ravel().tolist())
                    ref = max(ref, (3 * s - len(R)) / (3 * s))
            assert expansion_theta(A, S).theta == ref


def test_theta_budget():
    A = generate_dlrbg(200, 50, 4, seed=0)
    with pytest.raises(EnumerationBudgetExceeded):
        expansion_theta(A, 5, budget=10**6)


def test_theta_monotone_in_order():
    A = generate_dlrbg(14, 10, 3, seed=5)
    thetas = [expansion_theta(A, s).theta for s in range(1, 6)]
    assert all(a <= b for a, b in zip(thetas, thetas[1:]))


def test_rnsp_constants():
    assert rnsp_constants(0.125) == (0.5, 2.0)
    assert rnsp_constants(0.25) == (None, None)


def test_mplus_ones_gives_kappa_one():
    A = generate_dlrbg(64, 32, 4, seed=0)
    cert = mplus_evaluate(A, np.ones(32))
    assert cert.valid and cert.kappa == 1.0 and cert.atmin_inv == 1.0


def test_mplus_invalid_and_scaled():
    A = SparseWalkMatrix([[0], [1]], 2)
    assert not mplus_evaluate(A, np.array([1.0, 0.0])).valid
    assert not mplus_evaluate(A, np.array([1.0, -1.0])).valid
    cert = mplus_evaluate(A, np.array([1.0, 2.0]))
    assert cert.kappa == 2.0


def test_expander_error_bound_values():
    assert expander_error_bound(0.125, 1.0, 1.0) == pytest.approx(28.0, abs=1e-12)
    assert expander_error_bound(0.0, 1.0, 0.0) == 2.0
    assert expander_error_bound(0.0, 0.0, 1.0) == 6.0
    with pytest.raises(ValueError):
        expander_error_bound(1 / 6, 1, 1)


@pytest.mark.parametrize("theta", [0.0, 0.01, 0.05, 0.1, 0.125, 0.15])
def test_general_bound_reduces_to_expander_bound(theta):
    rho, tau = rnsp_constants(theta)
    for d1, r in [(1.0, 0.0), (0.0, 1.0), (0.3, 0.7)]:
        general = rnsp_error_bound(1, 4, rho, tau, 1.0, 1.0, 1.0, d1, r)
        assert general == pytest.approx(expander_error_bound(theta, d1, r), rel=1e-12)


def test_general_bound_q2_at_least_scaled():
    v = rnsp_error_bound(2, 4, 0.2, 1.5, 1.0, 1.0, 1.0, 1.0, 0.0)
    assert v == pytest.approx(2 * 1.44 / 0.8 * 4 ** -0.5)
    with pytest.raises(ValueError):
        rnsp_error_bound(1, 4, 0.6, 1.0, 2.0, 1.0, 1.0, 1.0, 1.0)


def test_nsp_holds_for_measured_expansion():
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(30):
        A = generate_dlrbg(8, 20, 3, seed=rng)
        stats2 = expansion_theta(A, 2)
        if stats2.rho is None:
            continue
        rep = nsp_bruteforce_check(oracle.densify(A), 1, stats2.rho, stats2.tau_rnsp,
                                   samples=100, seed=1)
        assert rep.passed, rep
        checked += 1
    assert checked > 0


def test_nsp_detects_violation():
    # two identical columns: v = e0 - e1 is in the kernel with |T| = 1
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    rep = nsp_bruteforce_check(A, 1, 0.5, 1.0, samples=20)
    assert not rep.passed and rep.worst_slack < 0
