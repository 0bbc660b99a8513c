"""Majorization tests, transport certificates, and Birkhoff decompositions.

The predicates here compare vectors after sorting in descending order, so
they are insensitive to the input ordering.  A vector ``u`` dominates ``x``
when every prefix sum of the sorted ``u`` is at least the matching prefix
sum of the sorted ``x``; the strong form additionally requires equal totals.

Certificates are constructive.  ``transport_matrix`` returns a doubly
stochastic matrix carrying ``u`` onto ``x``, and ``birkhoff`` splits any
doubly stochastic matrix into a convex combination of permutations, which
together express a dominated point as a convex combination of permutations
of the dominating one.
"""

import numpy as np

from . import solvers
from .model import ConicModel


class DegeneracyError(RuntimeError):
    """Raised when a certificate cannot be constructed from degenerate data.

    The optional ``detail`` attribute carries the offending intermediate
    values for diagnostics.
    """

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


def _as_vector(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("%s must be a nonempty one dimensional vector" % name)
    if not np.all(np.isfinite(arr)):
        raise ValueError("%s must be finite" % name)
    return arr


def _dominance_gaps(u, x):
    # Shared core: descending prefix sums of u minus those of x, plus the
    # scale used for tolerance decisions.
    us = np.sort(u)[::-1]
    xs = np.sort(x)[::-1]
    scale = max(1.0, float(np.max(np.abs(u), initial=0.0)),
                float(np.max(np.abs(x), initial=0.0)))
    return np.cumsum(us) - np.cumsum(xs), scale


def majorizes(u, x):
    """Return True when u majorizes x: prefix dominance plus equal totals."""
    u = _as_vector(u, "u")
    x = _as_vector(x, "x")
    if u.size != x.size:
        raise ValueError("u and x must have the same length")
    gaps, scale = _dominance_gaps(u, x)
    tol = 1e-10 * scale * u.size
    if abs(gaps[-1]) > tol:
        return False
    return bool(np.all(gaps[:-1] >= -tol))


def weakly_majorizes(u, x):
    """Return True when every prefix sum of sorted u covers that of x."""
    u = _as_vector(u, "u")
    x = _as_vector(x, "x")
    if u.size != x.size:
        raise ValueError("u and x must have the same length")
    gaps, scale = _dominance_gaps(u, x)
    tol = 1e-10 * scale * u.size
    return bool(np.all(gaps >= -tol))


def in_permutahedron(x, u):
    """Membership of x in the convex hull of the permutations of u."""
    return majorizes(u, x)


def transport_matrix(u, x):
    """Doubly stochastic S with S u = x, found by linear programming.

    Raises ValueError when u does not majorize x, and DegeneracyError if the
    feasibility problem fails numerically despite the majorization test
    passing.
    """
    u = _as_vector(u, "u")
    x = _as_vector(x, "x")
    if u.size != x.size:
        raise ValueError("u and x must have the same length")
    if not majorizes(u, x):
        raise ValueError("u does not majorize x, no transport matrix exists")
    n = u.size
    model = ConicModel(name="transport", sense="min")
    s = [[model.add_var(name="s_%d_%d" % (i, j), lb=0.0) for j in range(n)]
         for i in range(n)]
    for i in range(n):
        model.add_row([(s[i][j], u[j]) for j in range(n)], "eq", x[i])
    for i in range(n):
        model.add_row([(s[i][j], 1.0) for j in range(n)], "eq", 1.0)
    for j in range(n):
        model.add_row([(s[i][j], 1.0) for i in range(n)], "eq", 1.0)
    model.set_objective("min", {})
    model.seal()
    rep = solvers.solve_lp(model)
    if rep.status != "optimal":
        raise DegeneracyError(
            "transport feasibility LP ended with status %s" % rep.status,
            detail=rep)
    mat = np.maximum(np.array(rep.x[:n * n]).reshape(n, n), 0.0)
    return mat


class BirkhoffDecomposition:
    """Convex combination of permutations representing a matrix.

    ``permutations`` holds index arrays p where the associated permutation
    matrix P satisfies (P v)[i] == v[p[i]].  ``weights`` are the convex
    multipliers, in the order the permutations were extracted.
    """

    def __init__(self, weights, permutations, n):
        self.weights = np.asarray(weights, dtype=float)
        self.permutations = [np.asarray(p, dtype=int) for p in permutations]
        self.n = int(n)

    def __len__(self):
        return len(self.permutations)

    def matrix(self):
        """Rebuild the represented matrix from the decomposition."""
        out = np.zeros((self.n, self.n))
        for w, p in zip(self.weights, self.permutations):
            out[np.arange(self.n), p] += w
        return out

    def apply(self, v):
        """Return sum_l w_l P_l v for a vector v."""
        v = np.asarray(v, dtype=float)
        out = np.zeros(self.n)
        for w, p in zip(self.weights, self.permutations):
            out += w * v[p]
        return out


def _perfect_matching(support):
    # Kuhn augmenting paths on the bipartite support graph.  Returns
    # match_row[i] = column matched to row i, or None when no perfect
    # matching exists.
    n = support.shape[0]
    cols = [np.flatnonzero(support[i]) for i in range(n)]
    match_col = np.full(n, -1)

    def augment(i, seen):
        for j in cols[i]:
            if not seen[j]:
                seen[j] = True
                if match_col[j] < 0 or augment(match_col[j], seen):
                    match_col[j] = i
                    return True
        return False

    for i in range(n):
        if not augment(i, np.zeros(n, dtype=bool)):
            return None
    match_row = np.empty(n, dtype=int)
    match_row[match_col] = np.arange(n)
    return match_row


def birkhoff(mat):
    """Decompose a doubly stochastic matrix into permutation matrices.

    Uses at most n*n extraction steps, each removing the permutation found
    by a perfect matching on the positive support and subtracting it with
    the smallest matched entry as weight.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] == 0:
        raise ValueError("matrix must be square and nonempty")
    n = mat.shape[0]
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix must be finite")
    if np.min(mat) < -1e-9:
        raise ValueError("matrix has negative entries")
    if (np.max(np.abs(mat.sum(axis=1) - 1.0)) > 1e-9
            or np.max(np.abs(mat.sum(axis=0) - 1.0)) > 1e-9):
        raise ValueError("matrix is not doubly stochastic")
    r = np.clip(mat, 0.0, None)
    weights = []
    perms = []
    for _ in range(n * n):
        if r.max() <= 1e-12:
            break
        p = _perfect_matching(r > 1e-13)
        if p is None:
            raise DegeneracyError(
                "no perfect matching on the remaining support",
                detail=r.copy())
        w = float(r[np.arange(n), p].min())
        weights.append(w)
        perms.append(p)
        r[np.arange(n), p] -= w
    else:
        if r.max() > 1e-12:
            raise DegeneracyError(
                "residual mass left after n*n extraction steps",
                detail=r.copy())
    return BirkhoffDecomposition(weights, perms, n)
