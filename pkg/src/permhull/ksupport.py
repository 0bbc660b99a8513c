"""Cardinality-constrained norm-ball hulls and their exact separation.

Given a budget K and a base gauge, the convex hull of the K-sparse points of
the unit ball is again a norm ball.  This module computes that hull norm
through the averaged tail profile s(x), the pivot index and level delta, and
the flattened witness vector u(x).  From the dual maximizer against u(x) it
assembles the tight inequality that separates any exterior point, mapped
back to the original coordinates by undoing the sorting and signs.

The base gauge may be the Euclidean norm, the max norm, or any p-norm with
1 < p < infinity; these are the cases with closed-form duals.
"""

import numpy as np

_TIE_TOL = 1e-12


def _norm_spec(norm):
    # Accepts "l2", "linf", "lp(P)", "lp:P", or a numeric exponent.
    if isinstance(norm, str):
        tag = norm.strip().lower()
        if tag == "l2":
            return 2.0
        if tag == "linf":
            return np.inf
        if tag.startswith("lp(") and tag.endswith(")"):
            tag = tag[3:-1]
        elif tag.startswith("lp:"):
            tag = tag[3:]
        else:
            raise ValueError("unknown norm %r" % (norm,))
        p = float(tag)
    else:
        p = float(norm)
    if not np.isfinite(p):
        return np.inf
    if p <= 1.0:
        raise ValueError("p-norm exponent must exceed 1, got %r" % (norm,))
    return p


def _gauge(v, p):
    v = np.abs(np.asarray(v, dtype=float))
    if p == np.inf:
        return float(v.max(initial=0.0))
    if p == 2.0:
        return float(np.linalg.norm(v))
    return float(np.power(np.power(v, p).sum(), 1.0 / p))


def _dual_maximizer(u, p):
    # argmax { b.u : dual gauge of b <= 1 } for u >= 0; returns a vector of
    # the same length.  At u = 0 any dual-feasible point works; the first
    # unit vector keeps the output deterministic.
    u = np.asarray(u, dtype=float)
    if u.max(initial=0.0) <= 0.0:
        beta = np.zeros(u.size)
        beta[0] = 1.0
        return beta
    if p == np.inf:
        # Dual is the sum norm: put all mass on the largest entries,
        # split equally across ties.
        top = u.max()
        ties = u >= top - _TIE_TOL * max(1.0, top)
        beta = np.zeros(u.size)
        beta[ties] = 1.0 / ties.sum()
        return beta
    scaled = u / _gauge(u, p)
    if p == 2.0:
        return scaled
    return np.power(scaled, p - 1.0)


def _check_args(x, K):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("x must be a nonempty one dimensional vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    n = x.size
    K = int(K)
    if not 1 < K < n:
        raise ValueError("K must satisfy 1 < K < n, got K=%d, n=%d" % (K, n))
    return x, K


class SparsityCertificate:
    """Full record of the hull-norm computation at one point.

    s holds the K averaged tail sums, i_x the smallest index attaining
    their minimum (1-based), delta that minimum, u_x the K-sparse witness
    whose gauge value equals the hull norm, beta_hat a dual maximizer
    against u_x, and theta / chi the induced multiplier vectors; chi
    extends the averaged block through all n coordinates and prices the
    sorted absolute profile of x exactly at c_norm.
    """

    def __init__(self, K, s, i_x, delta, u_x, beta_hat, theta, chi, c_norm):
        self.K = K
        self.s = s
        self.i_x = i_x
        self.delta = delta
        self.u_x = u_x
        self.beta_hat = beta_hat
        self.theta = theta
        self.chi = chi
        self.c_norm = c_norm


def sparsity_certificate(x, K, norm="l2"):
    """Compute the hull norm of x with budget K and all its byproducts."""
    x, K = _check_args(x, K)
    p = _norm_spec(norm)
    n = x.size
    y = np.sort(np.abs(x))[::-1]
    tails = np.cumsum(y[::-1])[::-1]
    s = tails[:K] / (K - np.arange(K))
    i_x = int(np.argmin(s)) + 1
    delta = float(s[i_x - 1])
    u_x = np.zeros(n)
    u_x[:i_x - 1] = y[:i_x - 1]
    u_x[i_x - 1:K] = delta
    c_norm = _gauge(u_x[:K], p)
    beta_hat = _dual_maximizer(u_x[:K], p)
    flat = float(beta_hat[i_x - 1:K].sum()) / (K - i_x + 1)
    theta = np.zeros(n)
    theta[:i_x - 1] = beta_hat[:i_x - 1]
    theta[i_x - 1:K] = flat
    chi = np.zeros(n)
    chi[:i_x - 1] = beta_hat[:i_x - 1]
    chi[i_x - 1:] = flat
    return SparsityCertificate(K, s, i_x, delta, u_x, beta_hat, theta, chi,
                               c_norm)


def c_norm(x, K, norm="l2"):
    """Hull norm of x: the gauge of the flattened witness u(x)."""
    return sparsity_certificate(x, K, norm).c_norm


def k_support_norm(x, K):
    """Euclidean hull norm by the window formula, an independent route.

    Finds the unique shift r in {0..K-1} whose averaged tail lies between
    the neighboring sorted entries, then combines the kept head squares
    with the averaged tail.  Agrees with c_norm(x, K, "l2") to 1e-12.
    """
    x, K = _check_args(x, K)
    y = np.sort(np.abs(x))[::-1]
    slack = 1e-12 * max(1.0, float(y[0]))
    for wobble in (0.0, slack):
        for r in range(K):
            tail = float(y[K - r - 1:].sum())
            avg = tail / (r + 1)
            left = np.inf if K - r - 1 == 0 else y[K - r - 2]
            if left > avg - wobble and avg >= y[K - r - 1] - wobble:
                head = y[:K - r - 1]
                return float(
                    np.sqrt(np.dot(head, head) + tail * tail / (r + 1)))
    raise AssertionError("no admissible window shift found")


def membership(x, K, norm, radius):
    """Classify x against the hull of radius*unit-ball K-sparse points."""
    radius = float(radius)
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    x, K = _check_args(x, K)
    p = _norm_spec(norm)
    if p == np.inf:
        # Closed form: the hull is the intersection of a scaled sum-norm
        # ball and the max-norm ball.
        value = max(float(np.abs(x).sum()) / K, float(np.abs(x).max()))
    else:
        value = sparsity_certificate(x, K, p).c_norm
    ratio = value / radius
    if ratio > 1.0 + 1e-9:
        return "outside"
    if ratio < 1.0 - 1e-9:
        return "inside"
    return "boundary"


def separating_hyperplane(x, K, norm="l2"):
    """Inequality coefficients.v <= 1 valid for the unit hull, violated by x.

    The multiplier vector chi prices the sorted absolute profile at exactly
    the hull norm, so mapping it back through the sorting permutation and
    the signs of x gives a cut with value c_norm(x) > 1 at x.
    """
    x, K = _check_args(x, K)
    cert = sparsity_certificate(x, K, norm)
    if cert.c_norm <= 1.0 + 1e-9:
        raise ValueError("point is not outside the unit hull, no separation")
    order = np.argsort(-np.abs(x), kind="stable")
    coefficients = np.zeros(x.size)
    coefficients[order] = np.sign(x[order]) * cert.chi
    return coefficients, 1.0


def sparsity_min_norm(x, K, norm="l2"):
    """Minimizer of the gauge over sorted K-sparse vectors dominating |x|."""
    return sparsity_certificate(x, K, norm).u_x
