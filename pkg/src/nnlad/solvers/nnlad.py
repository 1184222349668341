"""Primal-dual solver for min_{z >= 0} ||Az - y||_1.

Each iteration is a dual ascent step clipped to the unit box, a primal
descent step projected onto the orthant, and an extrapolation
``v = 2 x_new - x_old``. The images ``A.T w``, ``A x`` and ``A v`` are kept
as caches so one product by ``A`` and one by ``A.T`` suffice per
iteration; ``A x`` is refreshed through ``(A v_new + A x_old) / 2``.
"""

import time

import numpy as np

from nnlad import _backend, _fallback
from nnlad.linalg import SparseWalkMatrix, as_operator, as_vector, operator_norm_2
from nnlad.solvers._common import (CERTIFIED, MAX_ITERS, STALLED, SolveResult,
                                   SolverParams, TraceSample)

# upper bound on iterations handed to a kernel between NaN checks
_CHUNK = 4096


def default_steps(A, op_norm=None):
    """``sigma = tau = 0.99 / ||A||_{2->2}``."""
    if op_norm is None:
        op_norm = operator_norm_2(A)
    return 0.99 / op_norm, 0.99 / op_norm


def nnlad_certificate(A, y, x, w):
    """Duality gap and dual infeasibility of a feasible pair ``(x, w)``.

    gap = ||Ax - y||_1 + <y, w> and infeasibility = max(0, -min (A^T w)).
    Both zero certify that ``x`` minimizes ||Az - y||_1 over z >= 0.
    """
    A = as_operator(A)
    M, N = A.shape
    y = as_vector(y, M, "y")
    x = as_vector(x, N, "x")
    w = as_vector(w, M, "w")
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    if w.size and np.max(np.abs(w)) > 1:
        raise ValueError("w must satisfy ||w||_inf <= 1")
    gap = float(np.abs(A.matvec(x) - y).sum() + y @ w)
    at_w = A.rmatvec(w)
    infeas = max(0.0, -float(at_w.min())) if at_w.size else 0.0
    return gap, infeas


def rate_bound_averages(k, x_ref, x0, w0, sigma, tau_step, M, pairing="primal_tau"):
    """Upper bound B(k) on ||A xbar_k - y||_1 - min, for the running average.

    ``pairing="primal_tau"`` puts 1/(2 tau) on ||x_ref - x0||^2 and
    1/(2 sigma) on the dual term; ``pairing="primal_sigma"`` swaps them.
    The two coincide when ``sigma == tau_step``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dx = float(np.sum((np.asarray(x_ref, float) - np.asarray(x0, float)) ** 2))
    w0 = np.asarray(w0, dtype=np.float64)
    dual = float(w0 @ w0 + 2 * np.abs(w0).sum() + M)
    if pairing == "primal_tau":
        a, b = tau_step, sigma
    elif pairing == "primal_sigma":
        a, b = sigma, tau_step
    else:
        raise ValueError(f"unknown pairing {pairing!r}")
    return (dx / (2 * a) + dual / (2 * b)) / k


def nnlad_solve(A, y, params=None, x0=None, w0=None, op_norm=None):
    """Solve NNLAD with the primal-dual iteration.

    Parameters
    ----------
    A : SparseWalkMatrix, DenseMatrix or operator
        Measurement matrix. Walk matrices run through the fused compiled
        loop when the extension is available.
    y : array_like, shape (M,)
        Observation.
    params : SolverParams, optional
    x0, w0 : array_like, optional
        Initial primal and dual points, zero by default.
    op_norm : float, optional
        Precomputed upper estimate of ``||A||_{2->2}``.

    Returns
    -------
    SolveResult
        ``dual`` holds the final ``w``; ``images`` the final caches.

    Raises
    ------
    ValueError
        If ``sigma * tau_step * ||A||^2 >= 1``.
    """
    A = as_operator(A)
    M, N = A.shape
    y = as_vector(y, M, "y")
    p = params if params is not None else SolverParams()
    if op_norm is None:
        op_norm = operator_norm_2(A)
    sigma = p.sigma if p.sigma is not None else 0.99 / op_norm
    tau = p.tau_step if p.tau_step is not None else 0.99 / op_norm
    if sigma <= 0 or tau <= 0:
        raise ValueError("step sizes must be positive")
    if sigma * tau * op_norm**2 >= 1.0:
        raise ValueError(
            f"step sizes violate sigma*tau < ||A||^-2: {sigma}*{tau}*{op_norm}^2 >= 1")
    eps1 = p.resolved_eps1(y)
    eps2 = float(p.eps2)

    x = np.zeros(N) if x0 is None else as_vector(x0, N, "x0").copy()
    w = np.zeros(M) if w0 is None else as_vector(w0, M, "w0").copy()
    x_start, w_start = x.copy(), w.copy()
    v = x.copy()
    counts = np.zeros(2, dtype=np.int64)
    wt = np.ascontiguousarray(A.rmatvec(w))
    xt = np.ascontiguousarray(A.matvec(x))
    vt = xt.copy()
    counts += 1
    setup = counts.copy()
    if p.track_averages:
        xsum, xtsum, wsum = np.zeros(N), np.zeros(M), np.zeros(M)
    else:
        xsum = xtsum = wsum = None

    fused = isinstance(A, SparseWalkMatrix) and _backend.kernels.HAS_FUSED_NNLAD
    kern = _backend.kernels

    def run(n):
        if fused:
            return kern.nnlad_steps(A.col_rows, y, sigma, tau, eps1, eps2, n, p.certify,
                                    x, w, v, xt, wt, vt, xsum, xtsum, wsum, counts)
        return _fallback.nnlad_steps(A.matvec, A.rmatvec, y, sigma, tau, eps1, eps2, n,
                                     p.certify, x, w, v, xt, wt, vt, xsum, xtsum, wsum, counts)

    trace = []
    t_start = time.perf_counter()

    def record(k):
        gap = float(np.abs(xt - y).sum() + y @ w)
        infeas = max(0.0, -float(wt.min())) if N else 0.0
        avg = float(np.abs(xtsum / k - y).sum()) if (xtsum is not None and k > 0) else float("nan")
        trace.append(TraceSample(
            iter=k, objective=float(np.abs(xt - y).sum()), gap=gap, dual_infeas=infeas,
            x_min=float(x.min()) if N else 0.0,
            w_absmax=float(np.abs(w).max()) if M else 0.0,
            avg_objective=avg, elapsed=time.perf_counter() - t_start,
            iterate=x.copy() if p.keep_iterates else None,
            avg_iterate=xsum / k if (p.keep_iterates and xsum is not None and k > 0) else None))

    points = p.trace_points()
    if p.tracing:
        record(0)
    k = 0
    status = MAX_ITERS
    pi = 0
    while k < p.max_iters:
        while pi < len(points) and points[pi] <= k:
            pi += 1
        target = points[pi] if pi < len(points) else p.max_iters
        target = min(target, k + _CHUNK)
        done, cert = run(target - k)
        k += done
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(w)) and np.all(np.isfinite(xt))):
            status = STALLED
            break
        if p.tracing and k == target and pi < len(points) and points[pi] == k:
            record(k)
        if cert and p.certify:
            status = CERTIFIED
            break
    if p.tracing and (not trace or trace[-1].iter != k):
        record(k)

    gap = float(np.abs(xt - y).sum() + y @ w)
    infeas = max(0.0, -float(wt.min())) if N else 0.0
    if status != STALLED:
        status = CERTIFIED if (gap <= eps1 and infeas <= eps2) else MAX_ITERS
    res = SolveResult(
        estimate=x, iterations=k, status=status, objective=float(np.abs(xt - y).sum()),
        dual=w, gap=gap, dual_infeasibility=infeas, trace=trace,
        matvecs=int(counts[0]), rmatvecs=int(counts[1]),
        setup_matvecs=int(setup[0]), setup_rmatvecs=int(setup[1]),
        images={"x_image": xt, "v": v, "v_image": vt, "w_image": wt},
        extra={"sigma": sigma, "tau_step": tau, "op_norm": op_norm, "eps1": eps1,
               "eps2": eps2, "x0": x_start, "w0": w_start, "backend": kern.NAME if fused else "python"},
    )
    if p.track_averages and k > 0:
        res.averages_estimate = xsum / k
        res.averages_dual = wsum / k
    return res
