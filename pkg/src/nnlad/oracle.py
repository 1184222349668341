"""Brute-force references for cross-checking the production code paths.

Nothing here calls the solver or kernel modules; densification builds the
matrix entry by entry from the column table.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

GRID_BUDGET = 10**8
DENSIFY_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box sampled with a uniform step (endpoints included)."""

    lower: tuple
    upper: tuple
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper need the same dimension")
        if any(hi < lo for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("empty box")

    @property
    def dim(self):
        return len(self.lower)

    def axes(self):
        out = []
        for lo, hi in zip(self.lower, self.upper):
            n = int(math.floor((hi - lo) / self.step + 1e-9)) + 1
            out.append(lo + self.step * np.arange(n))
        return out

    def size(self):
        return math.prod(a.size for a in self.axes())


def grid_minimize(objective, grid):
    """Exhaustive minimization of ``objective`` over a grid of dimension <= 3.

    ``objective`` receives a ``(k, dim)`` array of points and returns ``k``
    values. Ties go to the lexicographically first point.

    Returns
    -------
    argmin : ndarray
    minimum : float
    """
    if grid.dim > 3:
        raise ValueError("grid_minimize supports dimension <= 3")
    if grid.size() > GRID_BUDGET:
        raise BudgetExceeded(f"{grid.size()} grid points exceed {GRID_BUDGET}")
    axes = grid.axes()
    head, rest = axes[0], axes[1:]
    if rest:
        tail = np.stack([g.ravel() for g in np.meshgrid(*rest, indexing="ij")], axis=1)
    else:
        tail = np.zeros((1, 0))
    best_val = math.inf
    best_pt = None
    # one slab per value of the first coordinate keeps memory bounded
    for a in head:
        pts = np.empty((tail.shape[0], grid.dim))
        pts[:, 0] = a
        pts[:, 1:] = tail
        vals = np.asarray(objective(pts), dtype=np.float64)
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best_pt = pts[i].copy()
    return best_pt, best_val


def densify(A):
    """Explicit ``M x N`` array with ``1/D`` at every listed (row, column)."""
    M, N = A.n_rows, A.n_cols
    if M * N > DENSIFY_BUDGET:
        raise BudgetExceeded(f"{M}x{N} exceeds {DENSIFY_BUDGET} entries")
    out = np.zeros((M, N))
    D = A.degree
    for n in range(N):
        for r in A.col_rows[n]:
            out[int(r), n] = 1.0 / D
    return out


def exhaustive_best_Sterm(x, S):
    """min over supports |T| = S of ||x - x_T||_1, by enumeration (N <= 12)."""
    x = np.asarray(x, dtype=np.float64)
    N = x.size
    if N > 12:
        raise ValueError("exhaustive_best_Sterm is limited to N <= 12")
    total = float(np.abs(x).sum())
    best = math.inf
    for T in itertools.combinations(range(N), S):
        best = min(best, total - float(np.abs(x[list(T)]).sum()))
    return best


def exhaustive_hard_threshold_value(v, S):
    """min over z in Sigma_S of 1/2 ||z - v||^2, by support enumeration."""
    v = np.asarray(v, dtype=np.float64)
    total = float(v @ v)
    best = math.inf
    for T in itertools.combinations(range(v.size), S):
        best = min(best, 0.5 * (total - float(v[list(T)] @ v[list(T)])))
    return best


def sorted_median(values):
    """Median by full sort; midpoint of the middle pair for even length."""
    s = sorted(float(v) for v in values)
    n = len(s)
    return s[n // 2] if n % 2 else 0.5 * (s[n // 2 - 1] + s[n // 2])


def l1_residual_objective(A_dense, y):
    """Vectorized ``z -> ||A z - y||_1`` for :func:`grid_minimize`."""
    A_dense = np.asarray(A_dense, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def f(Z):
        return np.abs(Z @ A_dense.T - y).sum(axis=1)

    return f


def nnlad_grid_reference(A_dense, y, step):
    """Grid minimum of ||Az - y||_1 over z >= 0 for column-stochastic ``A``.

    For nonnegative ``A`` with unit column sums, ||Az||_1 = ||z||_1 on the
    orthant, so every minimizer lies in the box ``[0, 2 ||y||_1]^N``.
    """
    A_dense = np.asarray(A_dense, dtype=np.float64)
    if not np.allclose(A_dense.sum(axis=0), 1.0) or np.any(A_dense < 0):
        raise ValueError("box bound needs a nonnegative column-stochastic matrix")
    N = A_dense.shape[1]
    hi = step * math.ceil(2.0 * float(np.abs(y).sum()) / step)
    grid = GridSpec(lower=(0.0,) * N, upper=(hi,) * N, step=step)
    return grid_minimize(l1_residual_objective(A_dense, y), grid)
