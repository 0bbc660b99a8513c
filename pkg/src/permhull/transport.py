"""Capacitated transportation values and their closed forms.

The primal problem places mass t in [0,1]^{n x n} to maximize <W, t>
subject to row sums at most q, column sums at most p, and total mass at
most r.  Two parameter regimes admit closed forms: p = q = 1 (sum of the r
largest squares for W = w wT) and r = pq (product of the leading partial
sums).  The dual certificate builders return multipliers that are feasible
for the dual and match the closed-form value exactly, which is how the
relaxation constraints elsewhere certify block-sum bounds.
"""

import numpy as np

from . import solvers
from .model import ConicModel


def _as_weights(w):
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("w must be a nonempty one dimensional vector")
    if not np.all(np.isfinite(w)):
        raise ValueError("w must be finite")
    return w


def _check_sorted_nonneg(w):
    w = _as_weights(w)
    if w.min() < 0.0:
        raise ValueError("w must be nonnegative")
    if np.any(np.diff(w) > 0.0):
        raise ValueError("w must be sorted in descending order")
    return w


def transport_model(W, p, q, r):
    """Sealed LP whose maximum is the capacitated transportation value."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.size == 0:
        raise ValueError("W must be a nonempty square matrix")
    if not np.all(np.isfinite(W)):
        raise ValueError("W must be finite")
    n = W.shape[0]
    p = int(p)
    q = int(q)
    r = int(r)
    if not (1 <= p <= n and 1 <= q <= n):
        raise ValueError("p and q must lie in 1..n")
    if not 1 <= r <= min(p * n, q * n):
        raise ValueError("r must lie in 1..min(p*n, q*n)")
    model = ConicModel(name="transportation", sense="max")
    t = [[model.add_var(name="t_%d_%d" % (i, j), lb=0.0, ub=1.0)
          for j in range(n)] for i in range(n)]
    for i in range(n):
        model.add_row([(t[i][j], 1.0) for j in range(n)], "le", float(q))
    for j in range(n):
        model.add_row([(t[i][j], 1.0) for i in range(n)], "le", float(p))
    model.add_row([(t[i][j], 1.0) for i in range(n) for j in range(n)],
                  "le", float(r))
    model.set_objective("max", [(t[i][j], float(W[i, j]))
                                for i in range(n) for j in range(n)])
    return model.seal()


def h_primal(W, p, q, r):
    """Optimal value of the capacitated transportation LP for weights W."""
    rep = solvers.solve_lp(transport_model(W, p, q, r))
    if rep.status != "optimal":
        raise solvers.SolverError(
            "transportation LP ended with status %s" % rep.status)
    return float(rep.objective)


def h_closed_diag(w, r):
    """Closed form for p = q = 1: the sum of the r largest squares."""
    w = _as_weights(w)
    if w.min() < 0.0:
        raise ValueError("w must be nonnegative")
    r = int(r)
    if not 1 <= r <= w.size:
        raise ValueError("r must lie in 1..n")
    top = np.sort(w)[::-1][:r]
    return float(np.dot(top, top))


def h_closed_block(w, p, q):
    """Closed form for r = pq: product of the leading p- and q-sums."""
    w = _as_weights(w)
    if w.min() < 0.0:
        raise ValueError("w must be nonnegative")
    n = w.size
    p = int(p)
    q = int(q)
    if not (1 <= p <= n and 1 <= q <= n):
        raise ValueError("p and q must lie in 1..n")
    ws = np.sort(w)[::-1]
    return float(ws[:p].sum() * ws[:q].sum())


def dual_certificate_block(w, p, q):
    """Dual multipliers achieving h_closed_block, for sorted nonneg w.

    Returns (alpha, beta, gamma, delta) with alpha, beta vectors, gamma a
    scalar, and delta an n x n matrix, satisfying alpha_i + beta_j + gamma
    + delta_ij >= w_i w_j everywhere and q*sum(alpha) + p*sum(beta) +
    p*q*gamma + sum(delta) = h_closed_block(w, p, q).
    """
    w = _check_sorted_nonneg(w)
    n = w.size
    p = int(p)
    q = int(q)
    if not (1 <= p <= n and 1 <= q <= n):
        raise ValueError("p and q must lie in 1..n")
    wp = w[p - 1]
    wq = w[q - 1]
    alpha = np.maximum((w - wp) * wq, 0.0)
    beta = np.maximum(wp * (w - wq), 0.0)
    gamma = float(wp * wq)
    delta = np.zeros((n, n))
    block = np.outer(w[:p] - wp, w[:q] - wq)
    delta[:p, :q] = block
    return alpha, beta, gamma, delta


def dual_certificate_diag(w, r):
    """Dual multipliers achieving h_closed_diag, for sorted nonneg w.

    Same return layout as dual_certificate_block; here delta vanishes and
    the feasibility inequality follows from the mean of squares bounding
    the product.
    """
    w = _check_sorted_nonneg(w)
    n = w.size
    r = int(r)
    if not 1 <= r <= n:
        raise ValueError("r must lie in 1..n")
    wr2 = w[r - 1] ** 2
    alpha = np.maximum((w * w - wr2) / 2.0, 0.0)
    return alpha, alpha.copy(), float(wr2), np.zeros((n, n))
