"""Vectors, walk matrices and the products every solver is built on.

A D-LRBG walk matrix is stored column-compressed: an ``(N, D)`` table of
row indices, sorted within each column, with the implicit entry value
``1/D``. Products divide by ``D`` once per output entry so that column
sums come out as exactly 1.
"""

import warnings

import numpy as np

from nnlad import _backend


class ConvergenceWarning(UserWarning):
    """An iterative estimate stopped at its iteration cap."""


def as_vector(x, length=None, name="vector"):
    """Return ``x`` as a finite float64 vector, checking its length."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


class SparseWalkMatrix:
    """Random walk matrix of a D-left-regular bipartite graph.

    Parameters
    ----------
    col_rows : array_like of int, shape (N, D)
        Row indices of the nonzeros of each column. Each row of the table
        must hold ``D`` distinct indices in ``[0, n_rows)``, ascending.
    n_rows : int
        Number of rows ``M``.

    The implied dense matrix has entries in ``{0, 1/D}`` and every column
    sums to one. Instances are immutable.
    """

    __slots__ = ("col_rows", "n_rows")

    def __init__(self, col_rows, n_rows):
        cols = np.array(col_rows, dtype=np.int32, copy=True, order="C")
        if cols.ndim != 2:
            raise ValueError("col_rows must be an (N, D) table")
        n_rows = int(n_rows)
        n_cols, degree = cols.shape
        if n_cols < 1 or degree < 1:
            raise ValueError("need at least one column and D >= 1")
        if degree > n_rows:
            raise ValueError(f"degree D={degree} exceeds row count M={n_rows}")
        if cols.min() < 0 or cols.max() >= n_rows:
            raise ValueError("row index out of range")
        if degree > 1 and np.any(np.diff(cols, axis=1) <= 0):
            raise ValueError("row indices must be distinct and ascending within each column")
        cols.flags.writeable = False
        object.__setattr__(self, "col_rows", cols)
        object.__setattr__(self, "n_rows", n_rows)

    def __setattr__(self, name, value):
        raise AttributeError("SparseWalkMatrix is immutable")

    @classmethod
    def from_permutation(cls, perm):
        """D = 1 walk matrix sending column ``n`` to row ``perm[n]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(perm.size)):
            raise ValueError("not a permutation")
        return cls(perm[:, None], perm.size)

    @property
    def n_cols(self):
        return self.col_rows.shape[0]

    @property
    def degree(self):
        return self.col_rows.shape[1]

    @property
    def scale(self):
        return 1.0 / self.degree

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    def matvec(self, x):
        return matvec(self, x)

    def rmatvec(self, w):
        return matvec_transpose(self, w)

    def __eq__(self, other):
        if not isinstance(other, SparseWalkMatrix):
            return NotImplemented
        return self.n_rows == other.n_rows and np.array_equal(self.col_rows, other.col_rows)

    def __hash__(self):
        return hash((self.n_rows, self.col_rows.tobytes()))

    def __repr__(self):
        return f"SparseWalkMatrix(N={self.n_cols}, M={self.n_rows}, D={self.degree})"


class DenseMatrix:
    """Explicit real matrix, used for oracles and the Bernoulli ensemble."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64, copy=True, order="C")
        if arr.ndim != 2:
            raise ValueError("DenseMatrix needs a 2-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("DenseMatrix entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("DenseMatrix is immutable")

    @property
    def shape(self):
        return self.data.shape

    @property
    def n_rows(self):
        return self.data.shape[0]

    @property
    def n_cols(self):
        return self.data.shape[1]

    def matvec(self, x):
        return self.data @ as_vector(x, self.n_cols, "x")

    def rmatvec(self, w):
        return self.data.T @ as_vector(w, self.n_rows, "w")

    def __repr__(self):
        return f"DenseMatrix(M={self.n_rows}, N={self.n_cols})"


def as_operator(A):
    """Accept a walk matrix, a DenseMatrix, or anything array-like."""
    if isinstance(A, (SparseWalkMatrix, DenseMatrix)):
        return A
    if hasattr(A, "matvec") and hasattr(A, "rmatvec") and hasattr(A, "shape"):
        return A
    return DenseMatrix(A)


def matvec(A, x):
    """Compute ``A @ x`` for a walk matrix in Theta(DN) additions."""
    x = as_vector(x, A.n_cols, "x")
    return _backend.kernels.matvec(A.col_rows, A.n_rows, x)


def matvec_transpose(A, w):
    """Compute ``A.T @ w`` for a walk matrix."""
    w = as_vector(w, A.n_rows, "w")
    return _backend.kernels.rmatvec(A.col_rows, w)


def norm(x, p=2):
    """l_p norm for p in {0, 1, 2, inf}; p = 0 counts exact nonzeros."""
    x = np.asarray(x, dtype=np.float64)
    if p == 0:
        return float(np.count_nonzero(x))
    if p == 1:
        return float(np.abs(x).sum())
    if p == 2:
        return float(np.sqrt(x @ x))
    if p in (np.inf, "inf"):
        return float(np.abs(x).max()) if x.size else 0.0
    raise ValueError(f"unsupported norm order {p!r}")


def compressibility(x, S):
    """l1 distance from ``x`` to the S-sparse vectors.

    This is the sum of the ``N - S`` smallest magnitudes.
    """
    x = np.asarray(x, dtype=np.float64)
    if not 0 <= S <= x.size:
        raise ValueError(f"S must lie in [0, {x.size}]")
    mags = np.sort(np.abs(x))
    return float(mags[: x.size - S].sum())


def operator_norm_2(A, tol=1e-6, max_iters=10_000, seed=0, full_output=False):
    """Safe upper estimate of the largest singular value of ``A``.

    Power iteration on ``A.T @ A`` from the normalized all-ones vector plus
    a small seeded perturbation. Iteration stops once the relative
    increment of the estimate drops below ``tol``; the returned value is
    inflated by ``1 + tol``.

    If ``max_iters`` is exhausted a :class:`ConvergenceWarning` is emitted
    and the best estimate (inflated) is returned. With ``full_output`` the
    result is ``(estimate, converged, iterations)``.
    """
    A = as_operator(A)
    n_cols = A.shape[1]
    rng = np.random.default_rng(seed)
    u = np.ones(n_cols) / np.sqrt(n_cols) + 1e-3 * rng.standard_normal(n_cols)
    u /= np.linalg.norm(u)
    s_prev = 0.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        Au = A.matvec(u)
        s = float(np.linalg.norm(Au))
        if s == 0.0:
            raise ValueError("operator_norm_2 needs a nonzero matrix")
        g = A.rmatvec(Au)
        gn = np.linalg.norm(g)
        u = g / gn
        if s - s_prev <= tol * s:
            converged = True
            break
        s_prev = s
    # ||A.T A u|| for unit u bounds s**2 from below as well, take the larger
    best = max(s, float(np.sqrt(gn)))
    if not converged:
        warnings.warn(f"power iteration hit max_iters={max_iters}", ConvergenceWarning, stacklevel=2)
    est = best * (1.0 + tol)
    if full_output:
        return est, converged, it
    return est
