"""Comparison decoders: accelerated NNLS, Polyak subgradient NNLAD, EIHT."""

import time

import numpy as np

from nnlad import _backend
from nnlad.linalg import SparseWalkMatrix, as_operator, as_vector, operator_norm_2
from nnlad.solvers._common import (CERTIFIED, MAX_ITERS, STALLED, SolveResult,
                                   SolverParams, TraceSample)


def median_neighbors(A, z):
    """Per-column median of ``z`` over the column's neighbor rows.

    Even degrees use the midpoint of the two middle order statistics.
    """
    if not isinstance(A, SparseWalkMatrix):
        raise TypeError("median_neighbors needs a SparseWalkMatrix")
    z = as_vector(z, A.n_rows, "z")
    return _backend.kernels.median_neighbors(A.col_rows, z)


def hard_threshold(v, S):
    """Keep the ``S`` largest magnitudes of ``v``; ties go to the lower index."""
    v = np.asarray(v, dtype=np.float64)
    if not 0 <= S <= v.size:
        raise ValueError(f"S must lie in [0, {v.size}]")
    out = np.zeros_like(v)
    keep = np.argsort(-np.abs(v), kind="stable")[:S]
    out[keep] = v[keep]
    return out


class _Tracer:
    def __init__(self, params, objective_name):
        self.params = params
        self.points = set(params.trace_points())
        self.samples = []
        self.t0 = time.perf_counter()

    def maybe(self, k, x, objective, gap=float("nan"), force=False):
        if not self.params.tracing:
            return
        if not (force or k == 0 or k in self.points):
            return
        if self.samples and self.samples[-1].iter == k:
            return
        self.samples.append(TraceSample(
            iter=k, objective=float(objective), gap=gap, dual_infeas=float("nan"),
            x_min=float(x.min()) if x.size else 0.0, elapsed=time.perf_counter() - self.t0,
            iterate=x.copy() if self.params.keep_iterates else None))


def nnls_solve(A, y, params=None, x0=None, op_norm=None):
    """Accelerated projected gradient for min_{z >= 0} 1/2 ||Az - y||_2^2.

    Extrapolation weight ``(k - 1) / (k + alpha - 1)`` at iteration ``k``,
    no restarts. Stops (status ``certified``) once the projected step from
    the extrapolated point moves less than ``eps1`` in l2. The trace and
    ``objective`` report ``||Ax - y||_2``.
    """
    A = as_operator(A)
    M, N = A.shape
    y = as_vector(y, M, "y")
    p = params if params is not None else SolverParams()
    if p.step is not None:
        s = float(p.step)
    else:
        if op_norm is None:
            op_norm = operator_norm_2(A)
        s = 0.99 / op_norm**2
    alpha = float(p.alpha)
    eps1 = p.resolved_eps1(y)

    x = np.zeros(N) if x0 is None else np.maximum(as_vector(x0, N, "x0"), 0.0)
    x_prev = x.copy()
    Ax = A.matvec(x)
    Ax_prev = Ax.copy()
    n_mv, n_rmv = 1, 0
    tracer = _Tracer(p, "l2")
    tracer.maybe(0, x, np.linalg.norm(Ax - y))
    status = MAX_ITERS
    k = 0
    for k in range(1, p.max_iters + 1):
        beta = (k - 1) / (k + alpha - 1)
        z = x + beta * (x - x_prev)
        Az = Ax + beta * (Ax - Ax_prev)
        grad = A.rmatvec(Az - y)
        n_rmv += 1
        x_new = np.maximum(z - s * grad, 0.0)
        x_prev, x = x, x_new
        Ax_prev, Ax = Ax, A.matvec(x)
        n_mv += 1
        if not np.all(np.isfinite(x)):
            status = STALLED
            break
        move = float(np.linalg.norm(x - z))
        tracer.maybe(k, x, np.linalg.norm(Ax - y), gap=move)
        if p.certify and move <= eps1:
            status = CERTIFIED
            break
    obj = float(np.linalg.norm(Ax - y))
    tracer.maybe(k, x, obj, force=True)
    return SolveResult(estimate=x, iterations=k, status=status, objective=obj,
                       trace=tracer.samples, matvecs=n_mv, rmatvecs=n_rmv, setup_matvecs=1,
                       extra={"step": s, "alpha": alpha, "eps1": eps1})


def subgradient_solve(A, y, params=None, x0=None):
    """Projected subgradient method for NNLAD with the Polyak step.

    x <- max(0, x - ||Ax - y||_1 / ||A^T sgn(Ax - y)||^2 * A^T sgn(Ax - y)),
    which presumes an optimal value of zero. An exactly zero residual at a
    feasible point ends the run as ``certified``; a zero subgradient with a
    nonzero residual ends it as ``stalled``.
    """
    A = as_operator(A)
    M, N = A.shape
    y = as_vector(y, M, "y")
    p = params if params is not None else SolverParams()
    x = np.zeros(N) if x0 is None else as_vector(x0, N, "x0").copy()
    tracer = _Tracer(p, "l1")
    status = MAX_ITERS
    n_mv = n_rmv = 0
    k = 0
    while True:
        r = A.matvec(x) - y
        n_mv += 1
        f = float(np.abs(r).sum())
        tracer.maybe(k, x, f)
        if not np.isfinite(f):
            status = STALLED
            break
        if not np.any(r):
            if np.all(x >= 0):
                status = CERTIFIED
                break
            x = np.maximum(x, 0.0)
            continue
        if k >= p.max_iters:
            break
        g = A.rmatvec(np.sign(r))
        n_rmv += 1
        gn2 = float(g @ g)
        if gn2 == 0.0:
            status = STALLED
            break
        x = np.maximum(x - (f / gn2) * g, 0.0)
        k += 1
    tracer.maybe(k, x, f, force=True)
    return SolveResult(estimate=x, iterations=k, status=status, objective=f,
                       trace=tracer.samples, matvecs=n_mv, rmatvecs=n_rmv)


def eiht_solve(A, y, S_prime, params=None, x0=None):
    """Expander iterative hard thresholding.

    x <- H_{S'}(x + Median(y - Ax)). Stops as ``certified`` when an update
    moves the iterate by at most ``eps1`` in l1, otherwise after
    ``max_iters``.
    """
    if not isinstance(A, SparseWalkMatrix):
        raise TypeError("eiht_solve needs a SparseWalkMatrix")
    if S_prime < 1:
        raise ValueError("S_prime must be >= 1")
    M, N = A.shape
    y = as_vector(y, M, "y")
    p = params if params is not None else SolverParams()
    eps1 = p.resolved_eps1(y)
    kern = _backend.kernels
    x = np.zeros(N) if x0 is None else as_vector(x0, N, "x0").copy()
    tracer = _Tracer(p, "l1")
    status = MAX_ITERS
    n_mv = n_med = 0
    k = 0
    r = y - kern.matvec(A.col_rows, M, x)
    n_mv += 1
    tracer.maybe(0, x, np.abs(r).sum())
    for k in range(1, p.max_iters + 1):
        x_new = hard_threshold(x + kern.median_neighbors(A.col_rows, r), S_prime)
        n_med += 1
        delta = float(np.abs(x_new - x).sum())
        x = x_new
        if not np.all(np.isfinite(x)):
            status = STALLED
            break
        r = y - kern.matvec(A.col_rows, M, x)
        n_mv += 1
        tracer.maybe(k, x, np.abs(r).sum(), gap=delta)
        if p.certify and delta <= eps1:
            status = CERTIFIED
            break
    obj = float(np.abs(r).sum())
    tracer.maybe(k, x, obj, force=True)
    return SolveResult(estimate=x, iterations=k, status=status, objective=obj,
                       trace=tracer.samples, matvecs=n_mv, rmatvecs=0, setup_matvecs=1,
                       extra={"median_passes": n_med, "eps1": eps1})
