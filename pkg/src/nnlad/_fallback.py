"""Pure numpy twins of the compiled kernels in ``_kernels.pyx``.

Selected automatically when the extension is not built, or forced with
``NNLAD_BACKEND=python``.
"""

import numpy as np

HAS_FUSED_NNLAD = False
NAME = "python"


def matvec(cols, n_rows, x):
    n_cols, degree = cols.shape
    # bincount accumulates in input order, matching the compiled column sweep
    acc = np.bincount(cols.ravel(), weights=np.repeat(np.asarray(x, dtype=np.float64), degree),
                      minlength=n_rows)
    return acc / degree


def rmatvec(cols, w):
    w = np.asarray(w, dtype=np.float64)
    gathered = w[cols]
    acc = np.zeros(cols.shape[0])
    for j in range(cols.shape[1]):
        acc += gathered[:, j]
    return acc / cols.shape[1]


def median_neighbors(cols, z):
    vals = np.sort(np.asarray(z, dtype=np.float64)[cols], axis=1)
    degree = cols.shape[1]
    if degree % 2 == 1:
        return vals[:, degree // 2].copy()
    return 0.5 * (vals[:, degree // 2 - 1] + vals[:, degree // 2])


def min_neighborhood_sizes(cols, n_rows, S):
    """Smallest |R(T)| over |T| = s for s = 1..S using int bitsets."""
    n_cols = cols.shape[0]
    masks = [sum(1 << int(r) for r in col) for col in cols]
    best = np.full(S + 1, n_rows + 1, dtype=np.int64)
    if S <= 0 or n_cols == 0:
        return best
    # explicit stack: (next column to try, depth, union so far)
    stack = [(0, 0, 0)]
    while stack:
        start, depth, union = stack.pop()
        # push in reverse so the pop order stays lexicographic
        children = []
        for n in range(start, n_cols):
            u = union | masks[n]
            c = u.bit_count()
            if c < best[depth + 1]:
                best[depth + 1] = c
            if depth + 1 < S and n + 1 < n_cols:
                children.append((n + 1, depth + 1, u))
        stack.extend(reversed(children))
    return best


def nnlad_steps(matvec_fn, rmatvec_fn, y, sigma, tau, eps1, eps2, n_steps, check,
                x, w, v, xt, wt, vt, xsum, xtsum, wsum, counts):
    """Operator-generic version of the fused primal-dual loop.

    Takes the two products as callables instead of a column table, so it
    also drives dense matrices and instrumented operators. Arrays are
    updated in place exactly as the compiled loop does.
    """
    track = xsum is not None

    def certified():
        gap = np.abs(xt - y).sum() + y @ w
        return gap <= eps1 and (wt.size == 0 or wt.min() >= -eps2)

    for it in range(n_steps):
        if check and certified():
            return it, True
        np.clip(w + sigma * (vt - y), -1.0, 1.0, out=w)
        wt[:] = rmatvec_fn(w)
        counts[1] += 1
        np.negative(x, out=v)
        np.maximum(x - tau * wt, 0.0, out=x)
        v += 2.0 * x
        vt[:] = matvec_fn(v)
        counts[0] += 1
        xt[:] = 0.5 * (vt + xt)
        if track:
            xsum += x
            xtsum += xt
            wsum += w
    return n_steps, bool(check and certified())
