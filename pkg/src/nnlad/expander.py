"""Random left-regular bipartite graphs and the constants derived from them.

Covers generation of uniform D-LRBG walk matrices and 0/1 Bernoulli
matrices, exact expansion constants by subset enumeration, the M+
certificate, and the closed-form error bounds for non-negative least
residual decoders.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from nnlad import _backend
from nnlad.linalg import DenseMatrix, SparseWalkMatrix, as_operator, as_vector

ENUMERATION_BUDGET = 10**7


class EnumerationBudgetExceeded(RuntimeError):
    """Exact enumeration would visit more subsets than allowed."""


def generate_dlrbg(N, M, D, seed=None):
    """Draw a uniform D-LRBG walk matrix with ``N`` columns and ``M`` rows.

    Each column's ``D`` rows come from a partial Fisher-Yates shuffle of
    ``range(M)``, so every D-subset is equally likely; columns are
    independent. Deterministic given ``seed``.
    """
    N, M, D = int(N), int(M), int(D)
    if N < 1 or M < 1:
        raise ValueError("N and M must be positive")
    if not 1 <= D <= M:
        raise ValueError(f"need 1 <= D <= M, got D={D}, M={M}")
    rng = np.random.default_rng(seed)
    perm = np.tile(np.arange(M, dtype=np.int32), (N, 1))
    rows = np.arange(N)
    for i in range(D):
        j = rng.integers(i, M, size=N)
        head = perm[rows, i].copy()
        perm[rows, i] = perm[rows, j]
        perm[rows, j] = head
    return SparseWalkMatrix(np.sort(perm[:, :D], axis=1), M)


def generate_bernoulli(N, M, seed=None):
    """Dense ``M x N`` matrix of i.i.d. fair 0/1 entries."""
    rng = np.random.default_rng(seed)
    return DenseMatrix(rng.integers(0, 2, size=(int(M), int(N))).astype(np.float64))


def lossless_expander_rows(theta, S, N):
    """Row count and degree at which a uniform D-LRBG is a (2S, D, theta)
    lossless expander with high probability.

    Returned for reference only; nothing in the package relies on it.
    """
    log_term = math.log(math.e * N / S)
    m = (2.0 / theta) * math.exp(2.0 / theta) * S * log_term
    d = math.ceil((2.0 / theta) * log_term)
    return m, d


@dataclass(frozen=True)
class ExpanderStats:
    """Measured expansion constant and the RNSP constants it implies.

    ``rho`` and ``tau_rnsp`` are ``None`` when ``theta >= 1/4``.
    ``theta_by_order[s]`` holds the constant for order ``s`` (index 0 is 0).
    """

    S: int
    theta: float
    rho: float | None
    tau_rnsp: float | None
    theta_by_order: tuple = field(default=())

    def to_json(self, kappa=None):
        return {"theta": self.theta, "rho": self.rho, "tau": self.tau_rnsp,
                "kappa": kappa, "S": self.S}


def rnsp_constants(theta):
    """``(rho, tau)`` of the l1-RNSP implied by expansion ``theta < 1/4``."""
    if not 0 <= theta < 0.25:
        return None, None
    return 2 * theta / (1 - 4 * theta), 1 / (1 - 4 * theta)


def _subset_count(N, S):
    return sum(math.comb(N, s) for s in range(1, S + 1))


def expansion_theta(A, S, budget=ENUMERATION_BUDGET):
    """Exact expansion constant of order ``S`` by full subset enumeration.

    theta_S = max over nonempty |T| <= S of max(0, 1 - |R(T)| / (D |T|)).
    Raises :class:`EnumerationBudgetExceeded` rather than approximating.
    """
    if not isinstance(A, SparseWalkMatrix):
        raise TypeError("expansion_theta needs a SparseWalkMatrix")
    S = int(S)
    if not 1 <= S <= A.n_cols:
        raise ValueError(f"S must lie in [1, {A.n_cols}]")
    count = _subset_count(A.n_cols, S)
    if count > budget:
        raise EnumerationBudgetExceeded(
            f"{count} subsets of size <= {S} exceed the budget of {budget}")
    best = _backend.kernels.min_neighborhood_sizes(A.col_rows, A.n_rows, S)
    D = A.degree
    thetas = [0.0]
    for s in range(1, S + 1):
        thetas.append(max(0.0, (D * s - int(best[s])) / (D * s)))
    theta = max(thetas[1:])
    rho, tau = rnsp_constants(theta)
    return ExpanderStats(S=S, theta=theta, rho=rho, tau_rnsp=tau,
                         theta_by_order=tuple(thetas))


@dataclass(frozen=True)
class MPlusCertificate:
    """Result of testing ``A.T @ t > 0``; factors are ``None`` when invalid."""

    t: np.ndarray
    valid: bool
    atmax: float | None = None
    atmin_inv: float | None = None
    kappa: float | None = None


def mplus_evaluate(A, t):
    """Evaluate the M+ criterion for a candidate vector ``t``.

    kappa = max_n |(A^T t)_n| * max_n |1 / (A^T t)_n|. A vector with any
    nonpositive entry of ``A.T @ t`` yields an invalid certificate.
    """
    A = as_operator(A)
    t = as_vector(t, A.shape[0], "t")
    at = A.rmatvec(t)
    if at.size == 0 or np.any(at <= 0):
        return MPlusCertificate(t=t, valid=False)
    atmax = float(np.max(np.abs(at)))
    atmin_inv = float(np.max(1.0 / np.abs(at)))
    return MPlusCertificate(t=t, valid=True, atmax=atmax, atmin_inv=atmin_inv,
                            kappa=atmax * atmin_inv)


def expander_error_bound(theta, d1, residual_l1):
    """l1 error bound for NNLAD over a (2S, D, theta) lossless expander.

    2 (1-2θ)/(1-6θ) d1 + 2 (3-2θ)/(1-6θ) residual, for 0 <= θ < 1/6.
    """
    if not 0 <= theta < 1 / 6:
        raise ValueError(f"bound undefined for theta={theta} (need 0 <= theta < 1/6)")
    if d1 < 0 or residual_l1 < 0:
        raise ValueError("d1 and residual must be nonnegative")
    denom = 1 - 6 * theta
    return 2 * (1 - 2 * theta) / denom * d1 + 2 * (3 - 2 * theta) / denom * residual_l1


def rnsp_error_bound(q, S, rho, tau_rnsp, kappa, atmin_inv, t_dualnorm, d1, residual):
    """l_q error bound for non-negative least residual decoding.

    Uses the sharper formula when ``q == 1``. ``t_dualnorm`` is the dual
    norm of the M+ vector in the residual norm's dual (``||t||_inf`` for
    l1 residuals) and ``atmin_inv = max_n 1/(A^T t)_n``.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    kr = kappa * rho
    if kr >= 1:
        raise ValueError(f"bound undefined: kappa * rho = {kr} >= 1")
    if q == 1:
        c = (1 + kr) / (1 - kr)
        return (2 * c * kappa * d1
                + 2 * (c * atmin_inv * t_dualnorm + 2 / (1 - kr) * kappa * tau_rnsp) * residual)
    c = (1 + kr) ** 2 / (1 - kr)
    sp = S ** (1 / q - 1)
    return (2 * c * kappa * sp * d1
            + 2 * (c * sp * atmin_inv * t_dualnorm + (3 + kr) / (1 - kr) * kappa * tau_rnsp) * residual)


@dataclass
class NspReport:
    """Outcome of a sampled l1-RNSP falsification run (not a proof)."""

    vectors: int
    subsets: int
    violations: int
    worst_slack: float
    worst_v: np.ndarray | None = None
    worst_T: tuple | None = None

    @property
    def passed(self):
        return self.violations == 0


def nsp_bruteforce_check(A_dense, S, rho, tau_rnsp, samples=200, seed=0, slack_tol=1e-12):
    """Search for violations of ||v_T||_1 <= rho ||v_Tc||_1 + tau ||Av||_1.

    Every support ``|T| <= S`` is enumerated for each sampled ``v``. Half
    the samples are Gaussian, half are drawn from the null space of ``A``
    (when it is nontrivial), where only the ``rho`` term can save the
    inequality. Passing is evidence, not a certificate.
    """
    A = np.asarray(A_dense.data if isinstance(A_dense, DenseMatrix) else A_dense, dtype=np.float64)
    M, N = A.shape
    if N > 16:
        raise ValueError("nsp_bruteforce_check is limited to N <= 16")
    rng = np.random.default_rng(seed)
    kernel = scipy.linalg.null_space(A)
    n_kernel = samples // 2 if kernel.shape[1] else 0
    V = [np.zeros(N)]
    V.extend(rng.standard_normal(N) for _ in range(samples - n_kernel))
    V.extend(kernel @ rng.standard_normal(kernel.shape[1]) for _ in range(n_kernel))
    V = np.array(V)

    supports = [T for s in range(1, S + 1) for T in itertools.combinations(range(N), s)]
    mask = np.zeros((len(supports), N))
    for i, T in enumerate(supports):
        mask[i, list(T)] = 1.0
    absV = np.abs(V)
    on_T = absV @ mask.T
    off_T = absV.sum(axis=1, keepdims=True) - on_T
    meas = np.abs(V @ A.T).sum(axis=1, keepdims=True)
    slack = rho * off_T + tau_rnsp * meas - on_T
    bad = slack < -slack_tol * np.maximum(1.0, absV.sum(axis=1, keepdims=True))
    i, j = np.unravel_index(np.argmin(slack), slack.shape)
    return NspReport(vectors=V.shape[0], subsets=len(supports), violations=int(bad.sum()),
                     worst_slack=float(slack[i, j]), worst_v=V[i], worst_T=supports[j])
