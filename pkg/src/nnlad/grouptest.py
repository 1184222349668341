"""Pooled viral-load testing: simulate pooled PCR measurements and call
infected persons from an NNLAD estimate.

Each person's specimen is split into D equal parts, one per test kit, so
the pooling matrix is a walk matrix with unit column sums. Observations are
``y = A x + e_con + e_pcr`` where contamination is sparse and nonnegative
and the PCR error is small with mass spread over all kits.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from nnlad.expander import generate_dlrbg
from nnlad.linalg import SparseWalkMatrix, as_vector
from nnlad.solvers import SolverParams, nnlad_solve


@dataclass(frozen=True)
class PoolingDesign:
    matrix: SparseWalkMatrix

    def __post_init__(self):
        if not isinstance(self.matrix, SparseWalkMatrix):
            raise TypeError("a pooling design needs a SparseWalkMatrix")
        sums = self.matrix.rmatvec(np.ones(self.matrix.n_rows))
        if np.any(sums > 1 + 1e-12):
            raise ValueError("specimen usage exceeds 1 for some person")

    @classmethod
    def random(cls, persons, kits, splits, seed=None):
        return cls(generate_dlrbg(persons, kits, splits, seed=seed))

    @property
    def persons(self):
        return self.matrix.n_cols

    @property
    def kits(self):
        return self.matrix.n_rows

    @property
    def splits(self):
        return self.matrix.degree


@dataclass(frozen=True)
class ContaminationModel:
    """``k_con`` contaminated kits, each gaining a lognormal load."""

    k_con: int = 0
    median: float = 1.0
    spread: float = 1.0

    def __post_init__(self):
        if self.k_con < 0 or self.median <= 0 or self.spread < 0:
            raise ValueError("need k_con >= 0, median > 0, spread >= 0")

    def sample(self, M, rng):
        if self.k_con > M:
            raise ValueError("more contaminated tests than kits")
        e = np.zeros(M)
        if self.k_con:
            idx = rng.choice(M, size=self.k_con, replace=False)
            e[idx] = self.median * np.exp(self.spread * rng.standard_normal(self.k_con))
        return e


@dataclass(frozen=True)
class PcrNoiseModel:
    """Even-mass error with ``||e||_1 = eta * ||Ax||_1``."""

    eta: float = 0.0

    def __post_init__(self):
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ValueError("eta must be finite and >= 0")

    def sample(self, Ax, rng):
        M = Ax.size
        target = self.eta * float(np.abs(Ax).sum())
        if target == 0:
            return np.zeros(M)
        g = rng.laplace(size=M)
        return target * g / np.abs(g).sum()


@dataclass
class CallReport:
    called_positive: np.ndarray
    threshold: float
    estimate: np.ndarray
    false_positives: int | None = None
    false_negatives: int | None = None
    status: str = "certified"
    extra: dict = field(default_factory=dict)

    @property
    def exact(self):
        return self.false_positives == 0 and self.false_negatives == 0


def simulate_panel(design, true_loads, con=None, pcr=None, seed=None):
    """Pooled observation ``y = A x + e_con + e_pcr``.

    Returns
    -------
    y : ndarray, shape (M,)
    parts : dict
        ``Ax``, ``e_con`` and ``e_pcr`` for bookkeeping.
    """
    A = design.matrix
    x = as_vector(true_loads, A.n_cols, "true_loads")
    if np.any(x < 0):
        raise ValueError("viral loads must be nonnegative")
    rng = np.random.default_rng(seed)
    Ax = A.matvec(x)
    e_con = (con or ContaminationModel()).sample(A.n_rows, rng)
    e_pcr = (pcr or PcrNoiseModel()).sample(Ax, rng)
    return Ax + e_con + e_pcr, {"Ax": Ax, "e_con": e_con, "e_pcr": e_pcr}


def call_positives(estimate, threshold=None, truth=None):
    """Threshold an estimate; default ``threshold = 1e-3 * max(estimate)``."""
    estimate = np.asarray(estimate, dtype=np.float64)
    if threshold is None:
        threshold = 1e-3 * float(estimate.max()) if estimate.size else 0.0
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    called = np.flatnonzero(estimate > threshold)
    rep = CallReport(called_positive=called, threshold=float(threshold), estimate=estimate)
    if truth is not None:
        truth = np.asarray(truth, dtype=np.float64)
        pos = np.zeros(estimate.size, dtype=bool)
        pos[called] = True
        infected = truth > 0
        rep.false_positives = int(np.sum(pos & ~infected))
        rep.false_negatives = int(np.sum(~pos & infected))
    return rep


def decode_panel(design, y, params=None, threshold=None, truth=None):
    """NNLAD estimate of the loads followed by thresholding."""
    res = nnlad_solve(design.matrix, y, params)
    rep = call_positives(res.estimate, threshold, truth)
    rep.status = res.status
    rep.extra = {"iterations": res.iterations, "gap": res.gap}
    return rep


def individual_testing_baseline(true_loads, con=None, pcr=None, seed=None, threshold=None):
    """One kit per person: the estimate is the observation itself."""
    x = np.asarray(true_loads, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("viral loads must be nonnegative")
    rng = np.random.default_rng(seed)
    e_con = (con or ContaminationModel()).sample(x.size, rng)
    e_pcr = (pcr or PcrNoiseModel()).sample(x, rng)
    return call_positives(x + e_con + e_pcr, threshold, truth=x)


def random_loads(N, S, rng, low=1.0, high=100.0):
    """``S`` infected persons with loads log-uniform in ``[low, high]``."""
    rng = np.random.default_rng(rng)
    x = np.zeros(N)
    idx = rng.choice(N, size=S, replace=False)
    x[idx] = np.exp(rng.uniform(math.log(low), math.log(high), size=S))
    return x
