"""Closed-form proximal maps used by the primal-dual NNLAD iteration.

With F(w) = ||w - y||_1 and G the indicator of the nonnegative orthant:

* ``prox_nonneg`` is the prox of tau*G (projection),
* ``prox_f`` is the prox of sigma*F (soft shrink toward ``y``),
* ``prox_fstar`` is the prox of sigma*F* (clip of ``w - sigma*y`` to [-1, 1]).
"""

import numpy as np


def prox_nonneg(x):
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


def prox_f(w, sigma, y):
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    w = np.asarray(w, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = w - y
    return np.where(d > sigma, w - sigma, np.where(d < -sigma, w + sigma, y))


def prox_fstar(w, sigma, y):
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    w = np.asarray(w, dtype=np.float64)
    return np.clip(w - sigma * np.asarray(y, dtype=np.float64), -1.0, 1.0)


def prox_fstar_moreau(w, sigma, y):
    """``prox_fstar`` derived through Moreau's identity from ``prox_f``.

    w - sigma * prox_{F/sigma}(w / sigma); kept as an independent route for
    cross-checking the closed form.
    """
    w = np.asarray(w, dtype=np.float64)
    return w - sigma * prox_f(w / sigma, 1.0 / sigma, y)
