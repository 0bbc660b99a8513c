"""Dense small-scale linear algebra.

Sorting profiles with stable tie-breaking, symmetric eigendecomposition by
cyclic Jacobi rotations, and singular values via the Gram matrix. Everything
here is a pure function on small dense arrays; nothing is cached or shared.
"""

import numpy as np

__all__ = ["SortedProfile", "sorted_profile", "sym_eigen", "singular_values"]


def _as_vector(x):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-d real vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains NaN or Inf")
    return v


def _as_matrix(m):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("expected a nonempty 2-d real matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf")
    return a


class SortedProfile:
    """A vector together with its descending rearrangements.

    Attributes
    ----------
    source : ndarray
        The input vector, unchanged.
    descending : ndarray
        Entries of ``source`` in nonincreasing order.
    abs_descending : ndarray
        Absolute values of ``source`` in nonincreasing order.
    permutation : ndarray of int
        ``descending[k] == source[permutation[k]]``. Scattering the sorted
        entries back, ``out[permutation] = descending``, reproduces ``source``
        exactly. Ties keep their original relative order, so the map is
        deterministic.
    """

    __slots__ = ("source", "descending", "abs_descending", "permutation")

    def __init__(self, source, descending, abs_descending, permutation):
        self.source = source
        self.descending = descending
        self.abs_descending = abs_descending
        self.permutation = permutation

    def __repr__(self):
        return "SortedProfile(descending=%r)" % (list(self.descending),)


def sorted_profile(x):
    """Build the :class:`SortedProfile` of ``x``.

    Parameters
    ----------
    x : array_like
        Finite real vector.

    Returns
    -------
    SortedProfile
    """
    v = _as_vector(x)
    perm = np.argsort(-v, kind="stable")
    abs_desc = np.sort(np.abs(v))[::-1].copy()
    return SortedProfile(v, v[perm], abs_desc, perm)


def _jacobi(a, basis=None, tol_factor=1e-12, max_sweeps=100):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Returns eigenvalues (descending) and an orthogonal matrix whose columns
    are the matching eigenvectors. ``basis`` optionally warm-starts the
    rotation accumulator with an orthogonal matrix that already nearly
    diagonalizes ``a``; the result is identical up to roundoff, only faster.
    """
    n = a.shape[0]
    if basis is None:
        b = np.array(a, dtype=float, copy=True)
        v = np.eye(n)
    else:
        v = np.array(basis, dtype=float, copy=True)
        b = v.T @ a @ v
    norm = np.linalg.norm(a)
    if norm == 0.0:
        return np.zeros(n), np.eye(n)
    stop = tol_factor * norm
    # rotations below skip_at cannot keep the off-diagonal norm above stop
    skip_at = stop / max(n, 2)
    for _ in range(max_sweeps):
        # summing the squared off-diagonal entries directly avoids the
        # cancellation that total - diagonal suffers once off is tiny
        od = b.copy()
        np.fill_diagonal(od, 0.0)
        if np.linalg.norm(od) <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = b[p, q]
                if abs(apq) <= skip_at:
                    continue
                app = b[p, p]
                aqq = b[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if t == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                bp = b[p, :].copy()
                bq = b[q, :].copy()
                b[p, :] = c * bp - s * bq
                b[q, :] = s * bp + c * bq
                bp = b[:, p].copy()
                bq = b[:, q].copy()
                b[:, p] = c * bp - s * bq
                b[:, q] = s * bp + c * bq
                b[p, p] = app - t * apq
                b[q, q] = aqq + t * apq
                b[p, q] = 0.0
                b[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    lam = np.diag(b).copy()
    order = np.argsort(-lam, kind="stable")
    return lam[order], v[:, order]


def sym_eigen(a):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array_like
        Symmetric n-by-n matrix, n up to a few hundred.

    Returns
    -------
    eigenvalues : ndarray
        In nonincreasing order.
    eigenvectors : ndarray
        Orthogonal matrix, column k pairs with eigenvalue k, so that
        ``a == Q @ diag(lam) @ Q.T`` up to roundoff.
    """
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix is not square")
    scale = np.linalg.norm(m)
    if np.max(np.abs(m - m.T)) > 1e-12 * max(scale, 1.0):
        raise ValueError("matrix is not symmetric")
    sym = 0.5 * (m + m.T)
    return _jacobi(sym)


def singular_values(m):
    """Singular values of a rectangular matrix, descending.

    Computed as square roots of the Gram-matrix eigenvalues, which is
    accurate enough at the small sizes used here.
    """
    a = _as_matrix(m)
    if a.shape[0] >= a.shape[1]:
        gram = a.T @ a
    else:
        gram = a @ a.T
    lam, _ = _jacobi(0.5 * (gram + gram.T))
    return np.sqrt(np.clip(lam, 0.0, None))
