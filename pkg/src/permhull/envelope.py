"""Convex envelopes of symmetric functions over congruent boxes.

Everything here works on the box [a,b]^n.  For Schur-concave componentwise
convex functions the envelope at x is the function value at a single greedy
corner that majorizes x.  For the multilinear monomial the envelope is the
optimal value of a small LP over the majorization region, with the
objective interpolating the function through the chain of vertices
(b,..,b,a,..,a).  A recursive McCormick bound is provided as the baseline
comparison, plus the closed-form monomial hull test and the extraction of a
facet-defining affine underestimator through a given point.
"""

import numpy as np

from . import solvers
from .majorization import DegeneracyError, birkhoff, majorizes, transport_matrix
from .model import ConicModel, emit_majorization


class UnsupportedCaseError(ValueError):
    """Requested a regime with no closed-form hull description."""


class Box:
    """Congruent box [a,b]^n."""

    def __init__(self, a, b, n):
        self.a = float(a)
        self.b = float(b)
        self.n = int(n)
        if not self.a < self.b:
            raise ValueError("box needs a < b, got a=%r b=%r" % (a, b))
        if self.n < 1:
            raise ValueError("box dimension must be positive")

    @property
    def width(self):
        return self.b - self.a

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        tol = 1e-9 * max(1.0, abs(self.a), abs(self.b))
        return bool(x.min() >= self.a - tol and x.max() <= self.b + tol)

    def __repr__(self):
        return "Box(%r, %r, %d)" % (self.a, self.b, self.n)


def _check_point(x, box, name="x"):
    x = np.asarray(x, dtype=float)
    if x.shape != (box.n,):
        raise ValueError("%s must have length %d" % (name, box.n))
    if not np.all(np.isfinite(x)):
        raise ValueError("%s must be finite" % name)
    if not box.contains(x):
        raise ValueError("%s lies outside the box" % name)
    return np.clip(x, box.a, box.b)


def product(x):
    """The product of the coordinates, the standard test function here."""
    return float(np.prod(np.asarray(x, dtype=float)))


def greedy_corner(x, box):
    """The dominating corner point: push total mass into leading b's.

    With s the total excess over the all-a corner, the first i^s = max{i :
    i*(b-a) < s} coordinates sit at b, one coordinate takes the remainder,
    and the rest sit at a.  The result majorizes x and is the pointwise
    largest such profile in the box.
    """
    x = _check_point(x, box)
    w = box.width
    s = float(np.sum(x - box.a))
    i_s = 0
    while i_s + 1 <= box.n - 1 and (i_s + 1) * w < s:
        i_s += 1
    u = np.full(box.n, box.a)
    u[:i_s] = box.b
    u[i_s] = box.a + s - i_s * w
    return u


def schur_envelope_value(phi, x, box):
    """Envelope of a Schur-concave componentwise convex phi, evaluated at x.

    The value is phi at the greedy corner.  The majorization relation that
    justifies it is asserted on every call.
    """
    u = greedy_corner(x, box)
    assert majorizes(u, np.asarray(x, dtype=float))
    return float(phi(u))


def _chain_values(phi, box):
    # phi at the chain vertices with j coordinates at b, j = 0..n.
    vals = []
    for j in range(box.n + 1):
        v = np.full(box.n, box.a)
        v[:j] = box.b
        vals.append(float(phi(v)))
    return np.array(vals)


def _envelope_lp(x, box, chain):
    # Minimize the chain interpolant over {u in box, sorted, u majorizes x}.
    # chain[j] is the target function at the vertex with j leading b's.
    x = _check_point(x, box)
    n = box.n
    w = box.width
    c = np.diff(chain) / w
    model = ConicModel(name="envelope", sense="min")
    u = [model.add_var(name="u_%d" % i, lb=box.a, ub=box.b)
         for i in range(n)]
    for i in range(n - 1):
        model.add_row([(u[i], 1.0), (u[i + 1], -1.0)], "ge", 0.0)
    # sorting first makes the model, and so the value, identical for every
    # permutation of x rather than identical only up to roundoff
    emit_majorization(model, u, [float(v) for v in np.sort(x)[::-1]])
    model.set_objective("min", [(u[i], float(c[i])) for i in range(n)])
    model.seal()
    rep = solvers.solve_lp(model)
    if rep.status != "optimal":
        raise solvers.SolverError(
            "envelope LP ended with status %s" % rep.status)
    ustar = np.clip(np.array(rep.x[:n]), box.a, box.b)
    ustar = np.sort(ustar)[::-1]
    value = float(chain[0] + c @ (ustar - box.a))
    return value, ustar


def multilinear_envelope(x, box):
    """Convex envelope of the coordinate product over the box, at x."""
    value, _ = _envelope_lp(x, box, _chain_values(product, box))
    return value


def mccormick_relax(x, box):
    """Recursive McCormick lower bound for the coordinate product at x.

    Factors are folded in left to right.  Each step tracks the interval of
    values the relaxed partial product can take, together with the interval
    arithmetic bounds of the true partial product that parameterize the
    bilinear envelopes.  The result is the smallest relaxed value at x.
    """
    x = _check_point(x, box)
    a, b = box.a, box.b
    lo, hi = a, b
    zlo, zhi = float(x[0]), float(x[0])
    for k in range(1, box.n):
        t = float(x[k])
        lower = (lambda s, lo=lo, hi=hi, t=t:
                 max(a * s + lo * (t - a), b * s + hi * (t - b)))
        upper = (lambda s, lo=lo, hi=hi, t=t:
                 min(b * s + lo * (t - b), a * s + hi * (t - a)))
        cands = [zlo, zhi]
        # The two lines in each envelope cross where their values agree;
        # the min of a max (and max of a min) can only move there.
        if hi != lo:
            cross_l = (lo * (t - a) - hi * (t - b)) / (b - a)
            cross_u = (hi * (t - a) - lo * (t - b)) / (b - a)
            for cand in (cross_l, cross_u):
                if zlo < cand < zhi:
                    cands.append(cand)
        new_zlo = min(lower(s) for s in cands)
        new_zhi = max(upper(s) for s in cands)
        corners = (lo * a, lo * b, hi * a, hi * b)
        lo, hi = min(corners), max(corners)
        zlo, zhi = new_zlo, new_zhi
    return zlo


def monomial_hull_membership(x, y, boxes, alpha, beta):
    """Closed-form hull test for prod(y)^alpha >= prod(x)^beta on boxes.

    Both boxes must sit in the nonnegative orthant and the exponents must
    satisfy m*alpha <= beta where m is the y dimension; outside that regime
    the hull has no product closed form and the call is rejected.
    """
    box_x, box_y = boxes
    alpha = float(alpha)
    beta = float(beta)
    if alpha <= 0.0 or beta <= 0.0:
        raise ValueError("exponents must be positive")
    if box_x.a < 0.0 or box_y.a < 0.0:
        raise ValueError("boxes must lie in the nonnegative orthant")
    m = box_y.n
    if m * alpha > beta:
        raise UnsupportedCaseError(
            "m*alpha > beta has no closed-form hull here")
    x = _check_point(x, box_x, "x")
    y = _check_point(y, box_y, "y")
    u = greedy_corner(x, box_x)
    lhs = float(np.prod(y)) ** (1.0 / m)
    rhs = float(np.prod(np.power(u, beta / (m * alpha))))
    tol = 1e-9 * max(1.0, abs(lhs), abs(rhs))
    return bool(lhs >= rhs - tol)


class FacetCut:
    """Affine underestimator coefficients.x + offset tight on a vertex set."""

    def __init__(self, coefficients, offset, certifying_vertices):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.offset = float(offset)
        self.certifying_vertices = [np.asarray(v, dtype=float)
                                    for v in certifying_vertices]

    def value(self, x):
        return float(self.coefficients @ np.asarray(x, dtype=float)
                     + self.offset)


def _chain_vertex(box, j, perm=None):
    v = np.full(box.n, box.a)
    v[:j] = box.b
    if perm is None:
        return v
    return v[perm]


def facet_from_point(x, box, phi=product):
    """Facet of the envelope epigraph supporting the envelope at x.

    Requires x in general position (pairwise distinct coordinates).  The
    envelope LP solution is transported onto x through a doubly stochastic
    matrix, whose permutation decomposition names the box vertices the
    envelope touches; the unique affine interpolant on those vertices is
    returned after an exhaustive underestimation check on small boxes.
    """
    x = _check_point(x, box)
    n = box.n
    scale = max(1.0, abs(box.a), abs(box.b))
    diffs = np.abs(x[:, None] - x[None, :])[np.triu_indices(n, 1)]
    if n > 1 and diffs.min() <= 1e-12 * scale:
        raise ValueError("point has tied coordinates, not in general position")
    chain = _chain_values(phi, box)
    _, ustar = _envelope_lp(x, box, chain)
    s = transport_matrix(ustar, x)
    dec = birkhoff(s)
    w = box.width
    gammas = np.empty(n + 1)
    gammas[0] = (box.b - ustar[0]) / w
    gammas[1:n] = (ustar[:-1] - ustar[1:]) / w
    gammas[n] = (ustar[-1] - box.a) / w
    seen = {}
    for weight, perm in zip(dec.weights, dec.permutations):
        if weight <= 1e-13:
            continue
        for j in range(n + 1):
            if gammas[j] <= 1e-12:
                continue
            v = _chain_vertex(box, j, perm)
            seen.setdefault(tuple(v == box.b), v)
    vertices = list(seen.values())
    mat = np.array([list(v) + [1.0] for v in vertices])
    target = np.array([phi(v) for v in vertices])
    # Full rank gives the unique interpolant; short vertex sets fall back
    # to the minimum-norm fit, which the validation below must then clear.
    sol, _, _, _ = np.linalg.lstsq(mat, target, rcond=None)
    residual = float(np.abs(mat @ sol - target).max())
    fscale = max(1.0, float(np.abs(chain).max()))
    if residual > 1e-9 * fscale:
        raise DegeneracyError(
            "affine fit does not interpolate the certifying vertices",
            detail=vertices)
    coeffs, offset = sol[:n], sol[n]
    if n <= 12:
        for mask in range(1 << n):
            v = np.where([(mask >> i) & 1 for i in range(n)], box.b, box.a)
            if coeffs @ v + offset > phi(v) + 1e-9 * fscale:
                raise DegeneracyError(
                    "fit fails to underestimate at a box vertex",
                    detail=vertices)
    return FacetCut(coeffs, offset, vertices)


def holefree_faces(n, d):
    """The d-faces whose sorted profile is free of interior holes.

    Each face pins a leading block of coordinates at b and a trailing block
    at a, leaving d consecutive coordinates free; exactly n-d+1 such faces
    exist.  Returned as (at_b, free, at_a) index tuples.
    """
    n = int(n)
    d = int(d)
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    faces = []
    for l in range(n - d + 1):
        faces.append((tuple(range(l)), tuple(range(l, l + d)),
                      tuple(range(l + d, n))))
    return faces
