"""Self-check suites that compare production code against brute-force oracles.

Each suite returns a list of :class:`Check` results; ``nnlad verify`` prints
one line per check.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from nnlad import oracle
from nnlad.expander import expansion_theta, generate_dlrbg
from nnlad.linalg import DenseMatrix, SparseWalkMatrix
from nnlad.solvers import (SolverParams, nnlad_certificate, nnlad_solve, prox_fstar,
                           prox_fstar_moreau, prox_nonneg, rate_bound_averages)

SUITES = ("prox", "theta", "certificate", "rate")


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _grid_box(lo, hi, step):
    lo = step * np.floor(np.asarray(lo) / step)
    hi = step * np.ceil(np.asarray(hi) / step)
    return oracle.GridSpec(tuple(lo), tuple(hi), step)


def prox_grid_cases(n_cases=50, seed=0, step=1e-3):
    """Yield ``(kind, closed_form, grid_argmin)`` for random 1-2 dim problems.

    ``kind`` alternates between the orthant projection and the clipped dual
    prox. The grid box always contains the exact minimizer.
    """
    rng = np.random.default_rng(seed)
    for i in range(n_cases):
        dim = 1 + i % 2
        if i % 4 < 2:
            x = rng.uniform(-1.5, 1.5, dim)
            grid = _grid_box(np.zeros(dim), np.maximum(x, 0) + 0.1, step)
            f = lambda Z, x=x: 0.5 * ((Z - x) ** 2).sum(axis=1)
            z, _ = oracle.grid_minimize(f, grid)
            yield "prox_nonneg", prox_nonneg(x), z
        else:
            w = rng.uniform(-2, 2, dim)
            y = rng.uniform(-2, 2, dim)
            sigma = rng.uniform(0.1, 2.0)
            grid = oracle.GridSpec((-1.0,) * dim, (1.0,) * dim, step)
            # prox of sigma * F* where F*(u) = <u, y> on the unit box
            f = lambda Z, w=w, y=y, s=sigma: 0.5 * ((Z - w) ** 2).sum(axis=1) + s * (Z @ y)
            z, _ = oracle.grid_minimize(f, grid)
            yield "prox_fstar", prox_fstar(w, sigma, y), z


def prox_suite(n_cases=50, seed=0, step=1e-3, tol=2e-3):
    devs = {"prox_nonneg": 0.0, "prox_fstar": 0.0}
    for kind, closed, grid_min in prox_grid_cases(n_cases, seed, step):
        devs[kind] = max(devs[kind], float(np.max(np.abs(closed - grid_min))))
    rng = np.random.default_rng(seed + 1)
    moreau = 0.0
    for _ in range(200):
        w, y = rng.normal(size=5) * 2, rng.normal(size=5) * 2
        s = rng.uniform(0.05, 3.0)
        moreau = max(moreau, float(np.max(np.abs(prox_fstar(w, s, y) - prox_fstar_moreau(w, s, y)))))
    return [Check(k, v <= tol, f"max deviation {v:.3g} vs grid (tol {tol})") for k, v in devs.items()] + [
        Check("moreau_identity", moreau <= 1e-12, f"max deviation {moreau:.3g}")]


def worked_example_matrix():
    """N=3, M=4, D=2 with columns {0,1}, {2,3}, {0,2}."""
    return SparseWalkMatrix(np.array([[0, 1], [2, 3], [0, 2]]), 4)


def theta_suite():
    A = worked_example_matrix()
    t2 = expansion_theta(A, 2).theta
    t1 = expansion_theta(A, 1).theta
    out = [Check("theta_S2", t2 == 0.25, f"theta={t2} expected 0.25"),
           Check("theta_S1", t1 == 0.0, f"theta={t1} expected 0")]
    # brute force over explicit neighbor sets on random tiny graphs
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        B = generate_dlrbg(8, 6, 3, seed=rng)
        dense = oracle.densify(B)
        for S in (1, 2, 3):
            ref = 0.0
            for s in range(1, S + 1):
                for T in itertools.combinations(range(8), s):
                    nbrs = np.count_nonzero(dense[:, list(T)].sum(axis=1))
                    ref = max(ref, (3 * s - nbrs) / (3 * s))
            worst = max(worst, abs(ref - expansion_theta(B, S).theta))
    out.append(Check("theta_enumeration", worst == 0.0, f"max mismatch {worst}"))
    return out


def tiny_instances(n=20, seed=0):
    """Small column-stochastic problems with ||y||_1 = 1/2.

    Alternates between the fixed 2x3 matrix [[1,0,1/2],[0,1,1/2]] and random
    3x3 walk matrices of degree 2. Returns (operator, dense, y) triples.
    """
    rng = np.random.default_rng(seed)
    fixed = np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]])
    out = []
    for i in range(n):
        if i % 2 == 0:
            op, dense = DenseMatrix(fixed), fixed
        else:
            op = generate_dlrbg(3, 3, 2, seed=rng)
            dense = oracle.densify(op)
        y = rng.uniform(0, 1, dense.shape[0])
        y *= 0.5 / y.sum()
        out.append((op, dense, y))
    return out


def certificate_suite(n=6, seed=0, step=5e-3, tol=1e-2):
    out = []
    for i, (op, dense, y) in enumerate(tiny_instances(n, seed)):
        res = nnlad_solve(op, y, SolverParams(eps1=1e-9, eps2=1e-9, max_iters=10**6))
        gap, infeas = nnlad_certificate(op, y, res.estimate, res.dual)
        _, fmin = oracle.nnlad_grid_reference(dense, y, step)
        ok = gap <= 1e-8 and infeas <= 1e-8 and abs(res.objective - fmin) <= tol
        out.append(Check(f"instance_{i}", ok, f"gap={gap:.2e} infeas={infeas:.2e} "
                                             f"obj={res.objective:.6f} grid={fmin:.6f}"))
    return out


def rate_suite(n=3, seed=0, N=64, M=32, D=4, S=4, ks=(1, 10, 100, 1000)):
    out = []
    rng = np.random.default_rng(seed)
    for i in range(n):
        A = generate_dlrbg(N, M, D, seed=rng)
        x = np.zeros(N)
        x[rng.choice(N, S, replace=False)] = rng.exponential(size=S)
        y = A.matvec(x)
        ref = nnlad_solve(A, y, SolverParams(max_iters=10**5, certify=False))
        run = nnlad_solve(A, y, SolverParams(max_iters=max(ks), certify=False,
                                             track_averages=True, trace_iters=ks))
        worst = -np.inf
        for smp in run.trace:
            if smp.iter in ks:
                b = rate_bound_averages(smp.iter, ref.estimate, np.zeros(N), np.zeros(M),
                                        run.extra["sigma"], run.extra["tau_step"], M)
                worst = max(worst, smp.avg_objective - ref.objective - b)
        out.append(Check(f"instance_{i}", worst <= 1e-9, f"max(gap - bound) = {worst:.3g}"))
    return out


def run_suite(name):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return {"prox": prox_suite, "theta": theta_suite, "certificate": certificate_suite,
            "rate": rate_suite}[name]()
