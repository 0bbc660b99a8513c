"""Sparse principal component analysis: exact oracle and conic relaxations.

The problem is max x'Sx over unit vectors with at most K nonzeros.  The
exact value comes from enumerating supports and taking the top eigenvalue
of each principal submatrix.  Seven relaxations of increasing strength are
built as conic models over lifted matrix variables: the absolute-value
bound (D), the row-norm bound (B), and a family that constrains the sorted
profile of the lifted support matrix U against Y = |X| through block-sum,
row-sum, and diagonal dominance rows (Submatrix, Rowsum, Diagonal, TwoStep),
plus a transportation-based strengthening with an explicit mass matrix (T).

Every builder also records where each variable lives, so the known exact
optimizer can be lifted to a full assignment and checked against every
constraint; the gap-closed report compares each relaxation against the D
bound on the scale set by the exact value.
"""

import csv
import hashlib
import io
import itertools
import math
import os

import numpy as np

from . import solvers
from .model import (ConicModel, _emit_dominance, _final_outputs,
                    bitonic_network, emit_sorting_majorization)


class DataError(ValueError):
    """A bundled data file is missing or fails its integrity check."""


KINDS = ("D", "B", "Rowsum", "Diagonal", "TwoStep", "Submatrix", "T")

_ALIASES = {
    "d": "D", "b": "B", "t": "T",
    "rowsum": "Rowsum",
    "diag": "Diagonal", "diagonal": "Diagonal",
    "2step": "TwoStep", "twostep": "TwoStep",
    "submat": "Submatrix", "submatrix": "Submatrix",
}


def relaxation_kind(name):
    """Canonical relaxation name from any accepted spelling."""
    key = str(name).strip().lower()
    if key in _ALIASES:
        return _ALIASES[key]
    raise ValueError("unknown relaxation kind %r" % (name,))


class SpcaInstance:
    """A covariance matrix with a sparsity budget.

    The matrix is symmetrized exactly and must be PSD up to 1e-8 relative;
    K must satisfy 1 < K < n.
    """

    def __init__(self, sigma, K, provenance="custom"):
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
            raise ValueError("sigma must be a square matrix")
        n = sigma.shape[0]
        if not np.all(np.isfinite(sigma)):
            raise ValueError("sigma must be finite")
        scale = 1.0 + float(np.abs(sigma).max())
        if float(np.abs(sigma - sigma.T).max()) > 1e-8 * scale:
            raise ValueError("sigma must be symmetric")
        sigma = (sigma + sigma.T) / 2.0
        eigs = np.linalg.eigvalsh(sigma)
        if eigs[0] < -1e-8 * max(1.0, float(np.abs(eigs).max())):
            raise ValueError("sigma must be positive semidefinite")
        K = int(K)
        if not 1 < K < n:
            raise ValueError("K must satisfy 1 < K < n, got K=%d, n=%d" % (K, n))
        self.sigma = sigma
        self.n = n
        self.K = K
        self.provenance = str(provenance)

    def to_dict(self):
        return {"n": self.n, "K": self.K,
                "sigma": [float(v) for v in self.sigma.reshape(-1)],
                "provenance": self.provenance}

    @classmethod
    def from_dict(cls, d):
        n = int(d["n"])
        sigma = np.asarray(d["sigma"], dtype=float)
        if sigma.size != n * n:
            raise ValueError("sigma must hold n*n entries row-major")
        return cls(sigma.reshape(n, n), int(d["K"]),
                   d.get("provenance", "custom"))


def exact_spca(inst):
    """Exact optimum by support enumeration.

    Returns (value, support, x) where x is a K-sparse unit vector with
    x'Sx equal to the value.  Instances with more than 1e7 supports are
    rejected.
    """
    n, K = inst.n, inst.K
    if math.comb(n, K) > 10 ** 7:
        raise ValueError("support enumeration budget exceeded")
    best_val = -np.inf
    best = None
    for sup in itertools.combinations(range(n), K):
        sub = inst.sigma[np.ix_(sup, sup)]
        vals, vecs = np.linalg.eigh(sub)
        if vals[-1] > best_val:
            best_val = float(vals[-1])
            best = (sup, vecs[:, -1])
    sup, vec = best
    x = np.zeros(n)
    x[list(sup)] = vec
    x /= np.linalg.norm(x)
    if x[int(np.argmax(np.abs(x)))] < 0:
        x = -x
    return best_val, tuple(sup), x


def random_instance(n, seed):
    """Random low-rank PSD instance, deterministic in the seed.

    Draws a uniform rank fraction, uniform eigenweights, and Gaussian
    directions; the budget is n/6 rounded half-up and clipped to at
    least 2 so the instance invariant 1 < K < n always holds.
    """
    n = int(n)
    if n < 4:
        raise ValueError("need n >= 4")
    rng = np.random.default_rng(int(seed))
    m = max(1, int(math.ceil(n * float(rng.uniform()))))
    lam = rng.uniform(size=m)
    dirs = rng.normal(size=(m, n))
    sigma = (dirs.T * lam) @ dirs
    sigma = (sigma + sigma.T) / 2.0
    K = max(2, int(math.floor(n / 6.0 + 0.5)))
    return SpcaInstance(sigma, K, provenance="random:%d:%d" % (n, int(seed)))


_PITPROPS_SHA256 = (
    "040216fe1a505ffb46e9b7a8ba554d8821511657fed10a20fcd6e98cade3d77f")


def load_pitprops(path=None):
    """The bundled 13x13 pitprops correlation matrix, integrity-checked."""
    if path is None:
        path = os.path.join(os.path.dirname(__file__), "data", "pitprops.csv")
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError:
        raise DataError("pitprops data file is missing")
    if hashlib.sha256(blob).hexdigest() != _PITPROPS_SHA256:
        raise DataError("pitprops data file failed its checksum")
    rows = list(csv.reader(io.StringIO(blob.decode("ascii"))))
    names = rows[0][1:]
    mat = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
    if mat.shape != (13, 13) or [r[0] for r in rows[1:]] != names:
        raise DataError("pitprops data file is malformed")
    if np.abs(mat - mat.T).max() > 0 or np.abs(np.diag(mat) - 1.0).max() > 0:
        raise DataError("pitprops matrix must be symmetric with unit diagonal")
    return mat


def pitprops_instance(K):
    return SpcaInstance(load_pitprops(), K, provenance="pitprops")


# -- builders ----------------------------------------------------------


def _vec(model, tag, n, lb=None, ub=None):
    return [model.add_var("%s_%d" % (tag, i), lb, ub) for i in range(n)]


def _sym(model, tag, n, lb=None, zero_beyond=None):
    # Lower-triangle variables of a symmetric n x n matrix block; entries
    # with an index past zero_beyond are pinned to 0.
    ids = {}
    for i in range(n):
        for j in range(i + 1):
            if zero_beyond is not None and i >= zero_beyond:
                ids[(i, j)] = model.add_var("%s_%d_%d" % (tag, i, j), 0.0, 0.0)
            else:
                ids[(i, j)] = model.add_var("%s_%d_%d" % (tag, i, j), lb)
    return ids


def _at(ids, i, j):
    return ids[(i, j)] if i >= j else ids[(j, i)]


def _full_sum(ids, rows, cols):
    # Coefficients of sum_{i in rows, j in cols} M_ij in lower-tri vars.
    out = []
    for i in rows:
        for j in cols:
            out.append((_at(ids, i, j), 1.0))
    return out


def _psd_schur(model, ids, vec, one, n):
    flat = []
    for i in range(n):
        flat.extend(_at(ids, i, j) for j in range(i + 1))
    flat.extend(vec)
    flat.append(one)
    model.add_psd(flat)


def _psd_plain(model, ids, n):
    flat = []
    for i in range(n):
        flat.extend(_at(ids, i, j) for j in range(i + 1))
    model.add_psd(flat)


def _objective(model, sigma, X):
    n = sigma.shape[0]
    coeffs = []
    for i in range(n):
        for j in range(n):
            if sigma[i, j] != 0.0:
                coeffs.append((_at(X, i, j), float(sigma[i, j])))
    model.set_objective("max", coeffs)


def _soc_product(model, layout, tag, a_terms, b_terms, y_terms):
    # Rows and a cone stating (sum y_terms)^2 <= (sum a_terms)(sum b_terms),
    # with both factor sums nonnegative, via fresh head/tail variables.
    head = model.add_var(tag + "_h")
    d1 = model.add_var(tag + "_d")
    d2 = model.add_var(tag + "_y")
    model.add_row([(head, 1.0)] + [(v, -c) for v, c in a_terms]
                  + [(v, -c) for v, c in b_terms], "eq", 0.0)
    model.add_row([(d1, 1.0)] + [(v, -c) for v, c in a_terms]
                  + [(v, c) for v, c in b_terms], "eq", 0.0)
    model.add_row([(d2, 1.0)] + [(v, -2.0 * c) for v, c in y_terms],
                  "eq", 0.0)
    model.add_soc([head, d1, d2])
    layout["recipes"].append((head, list(a_terms) + list(b_terms)))
    layout["recipes"].append((d1, list(a_terms)
                              + [(v, -c) for v, c in b_terms]))
    layout["recipes"].append((d2, [(v, 2.0 * c) for v, c in y_terms]))


def _dominance(model, layout, big, small, js, form, tag):
    # One sorted-dominance block, recorded for the exact lift.  The dual
    # form uses the selection-LP linearization; the network form relaxes a
    # comparator sort of the small side and pins its outputs to the big
    # side, which also forces equal totals and needs the big side to carry
    # explicit descending rows.
    n = len(big)
    start = model.nvars
    if form == "dual":
        _emit_dominance(model, big, small, js, False, tag)
        layout["dominance"].append(
            {"form": "dual", "big": big, "small": small,
             "js": list(js), "start": start})
    else:
        for i in range(n - 1):
            model.add_row([(big[i], 1.0), (big[i + 1], -1.0)], "ge", 0.0)
        net = bitonic_network(n)
        finals, _ = _final_outputs(net)
        start = model.nvars
        emit_sorting_majorization(model, big, small, net)
        layout["dominance"].append(
            {"form": "net", "big": big, "small": small,
             "comparators": net.comparators, "finals": finals,
             "start": start})


def _build_d(model, layout, inst):
    n = inst.n
    X = _sym(model, "X", n)
    V = _sym(model, "V", n, lb=0.0)
    W = _sym(model, "W", n, lb=0.0)
    layout["syms"].update(X=X, V=V, W=W)
    for i in range(n):
        for j in range(i + 1):
            model.add_row([(V[(i, j)], 1.0), (W[(i, j)], -1.0),
                           (X[(i, j)], -1.0)], "eq", 0.0)
    model.add_row([(X[(i, i)], 1.0) for i in range(n)], "le", 1.0)
    model.add_row(_full_sum(V, range(n), range(n))
                  + _full_sum(W, range(n), range(n)), "le", float(inst.K))
    _psd_plain(model, X, n)
    _objective(model, inst.sigma, X)


def _build_b(model, layout, inst):
    n, K = inst.n, inst.K
    X = _sym(model, "X", n)
    Y = _sym(model, "Y", n)
    V = _sym(model, "V", n, lb=0.0)
    W = _sym(model, "W", n, lb=0.0)
    z = _vec(model, "z", n, lb=0.0, ub=1.0)
    layout["syms"].update(X=X, Y=Y, V=V, W=W)
    layout["vecs"].update(z=z)
    for i in range(n):
        for j in range(i + 1):
            model.add_row([(V[(i, j)], 1.0), (W[(i, j)], -1.0),
                           (X[(i, j)], -1.0)], "eq", 0.0)
            model.add_row([(V[(i, j)], 1.0), (W[(i, j)], 1.0),
                           (Y[(i, j)], -1.0)], "eq", 0.0)
    model.add_row([(z[i], 1.0) for i in range(n)], "eq", float(K))
    model.add_row([(X[(i, i)], 1.0) for i in range(n)], "eq", 1.0)
    for i in range(n):
        model.add_row([(Y[(i, i)], 1.0), (z[i], -1.0)], "le", 0.0)
        for j in range(i + 1, n):
            model.add_row([(Y[(j, i)], 2.0), (z[i], -1.0)], "le", 0.0)
    model.add_row(_full_sum(Y, range(n), range(n)), "eq", float(K))
    for i in range(n):
        # ||X_i.||^2 <= z_i X_ii as a second-order row on fresh variables.
        head = model.add_var("bn_%d_h" % i)
        last = model.add_var("bn_%d_d" % i)
        tail = []
        model.add_row([(head, 1.0), (z[i], -1.0), (X[(i, i)], -1.0)],
                      "eq", 0.0)
        model.add_row([(last, 1.0), (z[i], -1.0), (X[(i, i)], 1.0)],
                      "eq", 0.0)
        layout["recipes"].append((head, [(z[i], 1.0), (X[(i, i)], 1.0)]))
        layout["recipes"].append((last, [(z[i], 1.0), (X[(i, i)], -1.0)]))
        for j in range(n):
            tj = model.add_var("bn_%d_t%d" % (i, j))
            model.add_row([(tj, 1.0), (_at(X, i, j), -2.0)], "eq", 0.0)
            layout["recipes"].append((tj, [(_at(X, i, j), 2.0)]))
            tail.append(tj)
        model.add_soc([head] + tail + [last])
    _psd_plain(model, X, n)
    _objective(model, inst.sigma, X)


def _add_u_structure(model, layout, inst):
    # Sorted support-profile block: u descending and K-sparse, U symmetric
    # nonnegative with row-wise descending leading block and zero tail.
    n, K = inst.n, inst.K
    u = []
    for i in range(n):
        if i < K:
            u.append(model.add_var("u_%d" % i, 0.0))
        else:
            u.append(model.add_var("u_%d" % i, 0.0, 0.0))
    U = _sym(model, "U", n, lb=0.0, zero_beyond=K)
    layout["vecs"].update(u=u)
    layout["syms"].update(U=U)
    for i in range(K - 1):
        model.add_row([(u[i], 1.0), (u[i + 1], -1.0)], "ge", 0.0)
    for i in range(K):
        for j in range(K - 1):
            model.add_row([(_at(U, i, j), 1.0), (_at(U, i, j + 1), -1.0)],
                          "ge", 0.0)
    return u, U


def _trace_coeffs(ids, n, sign=1.0):
    return [(ids[(i, i)], sign) for i in range(n)]


def _build_family(model, layout, inst, kind, maj_form):
    n, K = inst.n, inst.K
    one = model.add_var("one", 1.0, 1.0)
    x = _vec(model, "x", n)
    y = _vec(model, "y", n)
    v = _vec(model, "v", n, lb=0.0)
    w = _vec(model, "w", n, lb=0.0)
    X = _sym(model, "X", n)
    Y = _sym(model, "Y", n)
    V = _sym(model, "V", n, lb=0.0)
    W = _sym(model, "W", n, lb=0.0)
    layout["one"] = one
    layout["vecs"].update(x=x, y=y, v=v, w=w)
    layout["syms"].update(X=X, Y=Y, V=V, W=W)
    for i in range(n):
        model.add_row([(v[i], 1.0), (w[i], -1.0), (x[i], -1.0)], "eq", 0.0)
        model.add_row([(v[i], 1.0), (w[i], 1.0), (y[i], -1.0)], "eq", 0.0)
    for i in range(n):
        for j in range(i + 1):
            model.add_row([(V[(i, j)], 1.0), (W[(i, j)], -1.0),
                           (X[(i, j)], -1.0)], "eq", 0.0)
            model.add_row([(V[(i, j)], 1.0), (W[(i, j)], 1.0),
                           (Y[(i, j)], -1.0)], "eq", 0.0)
    u, U = _add_u_structure(model, layout, inst)
    model.add_row(_trace_coeffs(U, n), "le", 1.0)
    model.add_row(_full_sum(U, range(n), range(n))
                  + [(vid, -c) for vid, c in _full_sum(Y, range(n), range(n))],
                  "eq", 0.0)
    _psd_schur(model, X, x, one, n)
    _psd_schur(model, Y, y, one, n)
    _psd_schur(model, U, u, one, n)
    model.add_row(_trace_coeffs(U, n) + _trace_coeffs(X, n, -1.0), "eq", 0.0)
    # The sorted profile dominates the absolute values entrywise in prefix
    # sums; this block never uses the network form.
    _dominance(model, layout, u, y, range(1, n), "dual", "usort")
    if kind in ("Submatrix", "Rowsum", "TwoStep"):
        ru = _vec(model, "ru", n)
        ry = _vec(model, "ry", n)
        layout["vecs"].update(ru=ru, ry=ry)
        for i in range(n):
            model.add_row([(ru[i], 1.0)]
                          + [(vid, -c) for vid, c in _full_sum(U, [i], range(n))],
                          "eq", 0.0)
            model.add_row([(ry[i], 1.0)]
                          + [(vid, -c) for vid, c in _full_sum(Y, [i], range(n))],
                          "eq", 0.0)
            layout["recipes"].append((ru[i], _full_sum(U, [i], range(n))))
            layout["recipes"].append((ry[i], _full_sum(Y, [i], range(n))))
        _dominance(model, layout, ru, ry, range(1, n), maj_form, "rsort")
    if kind in ("Submatrix", "Diagonal", "TwoStep"):
        du = [U[(i, i)] for i in range(n)]
        dx = [X[(i, i)] for i in range(n)]
        _dominance(model, layout, du, dx, range(1, n), maj_form, "dsort")
    if kind == "Submatrix":
        for p in range(1, K + 1):
            for q in range(p, K + 1):
                pb = p if p <= K - 1 else n
                qb = q if q <= K - 1 else n
                alpha = _vec(model, "ta%d_%d" % (p, q), n, lb=0.0)
                beta = _vec(model, "tb%d_%d" % (p, q), n, lb=0.0)
                gamma = model.add_var("tg%d_%d" % (p, q), 0.0)
                delta = [_vec(model, "td%d_%d_%d" % (p, q, i), n, lb=0.0)
                         for i in range(n)]
                layout["dual_blocks"][(p, q)] = {
                    "alpha": alpha, "beta": beta, "gamma": gamma,
                    "delta": delta, "pb": pb, "qb": qb}
                for i in range(n):
                    for j in range(n):
                        model.add_row(
                            [(alpha[i], 1.0), (beta[j], 1.0), (gamma, 1.0),
                             (delta[i][j], 1.0), (_at(Y, i, j), -1.0)],
                            "ge", 0.0)
                coeffs = _full_sum(U, range(p), range(q))
                coeffs.extend((alpha[i], -float(qb)) for i in range(n))
                coeffs.extend((beta[j], -float(pb)) for j in range(n))
                coeffs.append((gamma, -float(pb * qb)))
                coeffs.extend((delta[i][j], -1.0)
                              for i in range(n) for j in range(n))
                model.add_row(coeffs, "ge", 0.0)
    if kind == "TwoStep":
        sr = [[model.add_var("sr_%d_%d" % (i, q)) for q in range(1, K + 1)]
              for i in range(n)]
        layout["sr"] = sr
        for q in range(1, K + 1):
            for i in range(n):
                r = model.add_var("s1_%d_%d_r" % (q, i))
                t = [model.add_var("s1_%d_%d_t%d" % (q, i, j), 0.0)
                     for j in range(n)]
                layout["block1"].append(
                    {"q": q, "i": i, "sr": sr[i][q - 1], "r": r, "t": t})
                model.add_row([(sr[i][q - 1], 1.0), (r, -float(q))]
                              + [(tj, -1.0) for tj in t], "ge", 0.0)
                for j in range(n):
                    model.add_row([(_at(Y, i, j), 1.0), (t[j], -1.0),
                                   (r, -1.0)], "le", 0.0)
        for p in range(1, K + 1):
            for q in range(1, K + 1):
                r = model.add_var("s2_%d_%d_r" % (p, q))
                t = [model.add_var("s2_%d_%d_t%d" % (p, q, i), 0.0)
                     for i in range(n)]
                layout["block2"].append({"p": p, "q": q, "r": r, "t": t})
                coeffs = _full_sum(U, range(p), range(q))
                coeffs.append((r, -float(p)))
                coeffs.extend((ti, -1.0) for ti in t)
                model.add_row(coeffs, "ge", 0.0)
                for i in range(n):
                    model.add_row([(sr[i][q - 1], 1.0), (t[i], -1.0),
                                   (r, -1.0)], "le", 0.0)
    _objective(model, inst.sigma, X)


def _build_t(model, layout, inst, maj_form):
    n, K = inst.n, inst.K
    X = _sym(model, "X", n)
    Y = _sym(model, "Y", n)
    V = _sym(model, "V", n, lb=0.0)
    W = _sym(model, "W", n, lb=0.0)
    layout["syms"].update(X=X, Y=Y, V=V, W=W)
    for i in range(n):
        for j in range(i + 1):
            model.add_row([(V[(i, j)], 1.0), (W[(i, j)], -1.0),
                           (X[(i, j)], -1.0)], "eq", 0.0)
            model.add_row([(V[(i, j)], 1.0), (W[(i, j)], 1.0),
                           (Y[(i, j)], -1.0)], "eq", 0.0)
    u, U = _add_u_structure(model, layout, inst)
    z = _vec(model, "z", n, lb=0.0, ub=1.0)
    layout["vecs"].update(z=z)
    T = [[model.add_var("T_%d_%d" % (i, j), 0.0) for j in range(n)]
         for i in range(n)]
    layout["T"] = T
    model.add_row(_trace_coeffs(U, n), "le", 1.0)
    model.add_row(_full_sum(U, range(n), range(n))
                  + [(vid, -c) for vid, c in _full_sum(Y, range(n), range(n))],
                  "eq", 0.0)
    _dominance(model, layout, [U[(i, i)] for i in range(n)],
               [X[(i, i)] for i in range(n)], range(1, n), "dual", "dsort")
    model.add_row([(z[i], 1.0) for i in range(n)], "eq", float(K))
    model.add_row(_trace_coeffs(U, n), "eq", 1.0)
    model.add_row(_trace_coeffs(Y, n), "eq", 1.0)
    model.add_row(_trace_coeffs(X, n), "eq", 1.0)
    for i in range(n):
        model.add_row([(T[i][i], 1.0), (Y[(i, i)], -1.0)], "eq", 0.0)
        model.add_row([(T[i][j], 1.0) for j in range(n)] + [(z[i], -1.0)],
                      "eq", 0.0)
        model.add_row([(T[j][i], 1.0) for j in range(n)]
                      + [(Y[(i, i)], -float(K))], "eq", 0.0)
        for j in range(n):
            if i != j:
                model.add_row([(T[i][j], 1.0), (Y[(j, j)], -1.0)], "le", 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            _soc_product(model, layout, "tp_%d_%d" % (i, j),
                         [(T[i][j], 1.0)], [(T[j][i], 1.0)],
                         [(_at(Y, i, j), 1.0)])
            _soc_product(model, layout, "yp_%d_%d" % (i, j),
                         [(Y[(i, i)], 1.0)], [(Y[(j, j)], 1.0)],
                         [(_at(Y, i, j), 1.0)])
    _psd_plain(model, X, n)
    _psd_plain(model, U, n)
    _objective(model, inst.sigma, X)


def _build(inst, kind, maj_form):
    kind = relaxation_kind(kind)
    if maj_form not in ("dual", "sortnet"):
        raise ValueError("maj_form must be 'dual' or 'sortnet'")
    model = ConicModel(name="spca-%s" % kind.lower(), sense="max")
    layout = {"kind": kind, "maj_form": maj_form, "one": None,
              "vecs": {}, "syms": {}, "T": None, "recipes": [],
              "dominance": [], "dual_blocks": {}, "block1": [], "block2": []}
    if kind == "D":
        _build_d(model, layout, inst)
    elif kind == "B":
        _build_b(model, layout, inst)
    elif kind == "T":
        _build_t(model, layout, inst, maj_form)
    else:
        _build_family(model, layout, inst, kind, maj_form)
    model.seal()
    return model, layout


def build_relaxation(inst, kind, maj_form="dual"):
    """Sealed conic model whose maximum is the named relaxation bound.

    maj_form chooses how the sorted-dominance blocks of the profile family
    are written: 'dual' for the selection-LP linearization, 'sortnet' for
    the comparator-network form (the entrywise profile block always uses
    the dual form, which does not force equal totals).
    """
    model, _ = _build(inst, kind, maj_form)
    return model


def solve_relaxation(inst, kind, tol=1e-6, maj_form="dual"):
    """Build and solve one relaxation; divergence is reported, not raised."""
    model, _ = _build(inst, kind, maj_form)
    return solvers.solve_conic(model, tol=tol)


def exact_lift(inst, kind, maj_form="dual"):
    """The exact optimizer lifted to a full assignment of one relaxation.

    Returns (model, point, value): point assigns every model variable the
    value it takes at the lift of the enumerated optimum, which must be
    feasible in every relaxation and is how builder correctness is checked.
    """
    model, layout = _build(inst, kind, maj_form)
    value, support, xs = exact_spca(inst)
    n, K = inst.n, inst.K
    y = np.abs(xs)
    u = np.sort(y)[::-1]
    z = np.zeros(n)
    z[list(support)] = 1.0
    X = np.outer(xs, xs)
    Y = np.abs(X)
    if layout["kind"] == "B":
        # The total-mass row on Y is an equality here, so pad the diagonal
        # inside the support up to total K.  There is always room: the
        # deficit K - |y|_1^2 is at most the slack K - 1 because the unit
        # vector y has |y|_1 >= 1, and each padded slot stays within z_i.
        need = float(K) - float(Y.sum())
        for i in support:
            step = min(1.0 - Y[i, i], need)
            Y[i, i] += step
            need -= step
    U = np.outer(u, u)
    point = np.zeros(model.nvars)
    if layout["one"] is not None:
        point[layout["one"]] = 1.0
    vec_vals = {"x": xs, "y": y, "v": np.maximum(xs, 0.0),
                "w": np.maximum(-xs, 0.0), "u": u, "z": z}
    for tag, ids in layout["vecs"].items():
        if tag in vec_vals:
            point[ids] = vec_vals[tag]
    sym_vals = {"X": X, "Y": Y, "U": U,
                "V": (Y + X) / 2.0, "W": (Y - X) / 2.0}
    for tag, ids in layout["syms"].items():
        for (i, j), vid in ids.items():
            point[vid] = sym_vals[tag][i, j]
    if layout["T"] is not None:
        for i in range(n):
            for j in range(n):
                point[layout["T"][i][j]] = z[i] * y[j] ** 2
    if "sr" in layout:
        for i in range(n):
            row = np.sort(Y[i])[::-1]
            for q in range(1, K + 1):
                point[layout["sr"][i][q - 1]] = row[:q].sum()
    for vid, terms in layout["recipes"]:
        point[vid] = sum(c * point[b] for b, c in terms)
    for rec in layout["dominance"]:
        small = np.array([point[i] for i in rec["small"]])
        if rec["form"] == "dual":
            ptr = rec["start"]
            ssort = np.sort(small)[::-1]
            for j in rec["js"]:
                point[ptr] = ssort[j - 1]
                point[ptr + 1:ptr + 1 + small.size] = np.maximum(
                    small - ssort[j - 1], 0.0)
                ptr += 1 + small.size
        else:
            # final outputs live on the big-side variables, already set
            wires = list(small)
            ptr = rec["start"]
            for (a, b), (a_done, b_done) in zip(rec["comparators"],
                                                rec["finals"]):
                hi, lo = max(wires[a], wires[b]), min(wires[a], wires[b])
                if not a_done:
                    point[ptr] = hi
                    ptr += 1
                if not b_done:
                    point[ptr] = lo
                    ptr += 1
                wires[a], wires[b] = hi, lo
    order = np.argsort(-y, kind="stable")
    for (p, q), blk in layout["dual_blocks"].items():
        pb, qb = blk["pb"], blk["qb"]
        wp = u[pb - 1]
        wq = u[qb - 1]
        alpha_s = np.maximum((u - wp) * wq, 0.0)
        beta_s = np.maximum(wp * (u - wq), 0.0)
        delta_s = np.zeros((n, n))
        delta_s[:pb, :qb] = np.outer(u[:pb] - wp, u[:qb] - wq)
        point[blk["gamma"]] = wp * wq
        for k in range(n):
            point[blk["alpha"][order[k]]] = alpha_s[k]
            point[blk["beta"][order[k]]] = beta_s[k]
            for l in range(n):
                point[blk["delta"][order[k]][order[l]]] = delta_s[k, l]
    for rec in layout["block1"]:
        rowvals = Y[rec["i"]]
        rsorted = np.sort(rowvals)[::-1]
        rv = rsorted[rec["q"] - 1]
        point[rec["r"]] = rv
        for j in range(n):
            point[rec["t"][j]] = max(rowvals[j] - rv, 0.0)
    for rec in layout["block2"]:
        q = rec["q"]
        col = np.array([point[layout["sr"][i][q - 1]] for i in range(n)])
        csorted = np.sort(col)[::-1]
        rv = csorted[rec["p"] - 1]
        point[rec["r"]] = rv
        for i in range(n):
            point[rec["t"][i]] = max(col[i] - rv, 0.0)
    return model, point, value


class GapReport:
    """Per-kind relaxation values and gap closed against the D bound."""

    def __init__(self, z_star, z_d, z_relax, gap_closed, seconds):
        self.z_star = z_star
        self.z_d = z_d
        self.z_relax = dict(z_relax)
        self.gap_closed = dict(gap_closed)
        self.seconds = dict(seconds)

    def to_dict(self):
        return {"zStar": self.z_star, "zD": self.z_d,
                "zRelax": self.z_relax,
                "gapClosedPercent": self.gap_closed,
                "seconds": self.seconds}


def gap_report(inst, kinds, tol=1e-6, maj_form="dual"):
    """Solve the named relaxations and report gap closed relative to D.

    Gap closed is 100 (zD - zRelax) / (zD - zStar); when the D bound
    already matches the exact value the gaps are undefined and reported
    as None.
    """
    kinds = [relaxation_kind(k) for k in kinds]
    z_star, _, _ = exact_spca(inst)
    rep_d = solve_relaxation(inst, "D", tol=tol)
    z_d = rep_d.objective
    z_relax = {}
    seconds = {"D": rep_d.seconds}
    for kind in kinds:
        if kind == "D":
            z_relax[kind] = z_d
            continue
        rep = solve_relaxation(inst, kind, tol=tol, maj_form=maj_form)
        z_relax[kind] = rep.objective
        seconds[kind] = rep.seconds
    denom = z_d - z_star
    # the D bound itself is only resolved to the solver tolerance, so a
    # denominator inside that noise floor means the gap is undefined
    floor = max(1e-9, 10.0 * tol) * max(1.0, abs(z_d))
    gap_closed = {}
    for kind, val in z_relax.items():
        if denom <= floor:
            gap_closed[kind] = None
        else:
            gap_closed[kind] = 100.0 * (z_d - val) / denom
    return GapReport(z_star, z_d, z_relax, gap_closed, seconds)
