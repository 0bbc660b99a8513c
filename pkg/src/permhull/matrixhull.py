"""Membership in matrix hulls that depend only on the spectrum.

For sets cut out by sign- and permutation-invariant conditions on singular
values, hull membership of a matrix reduces to hull membership of its
singular value vector; for symmetric matrices and permutation-invariant
conditions, to the eigenvalue vector.  The oracles passed in answer the
vector question, so no semidefinite machinery is involved.
"""

import numpy as np

from .linalg import singular_values, sym_eigen


def _as_matrix(m):
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("expected a nonempty matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix must be finite")
    return arr


def sv_hull_membership(m, vector_oracle):
    """Apply a sign/permutation-invariant vector oracle to the spectrum.

    The oracle receives the singular values in descending order and its
    answer is returned unchanged.
    """
    m = _as_matrix(m)
    return vector_oracle(singular_values(m))


def hiriart_membership(m, K, r):
    """Test nuclear norm <= r*K and spectral norm <= r, with slack 1e-9*r.

    This is the closed form of the hull of matrices with rank at most K and
    spectral norm at most r.
    """
    m = _as_matrix(m)
    r = float(r)
    if r <= 0.0:
        raise ValueError("r must be positive")
    q = min(m.shape)
    K = int(K)
    if not 1 <= K <= q:
        raise ValueError("K must lie in 1..%d, got %d" % (q, K))
    sv = singular_values(m)
    tol = 1e-9 * r
    return bool(sv.sum() <= r * K + tol and sv[0] <= r + tol)


def eig_hull_membership(m, vector_oracle):
    """Apply a permutation-invariant oracle to the eigenvalues, descending.

    The matrix must be symmetric; sign invariance of the oracle is not
    required, so the eigenvalue signs matter.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    scale = 1.0 + float(np.abs(m).max())
    if float(np.abs(m - m.T).max()) > 1e-9 * scale:
        raise ValueError("matrix must be symmetric")
    lam, _ = sym_eigen(0.5 * (m + m.T))
    return vector_oracle(lam)
