"""Self-contained solvers for the model IR.

``solve_lp`` is a two-phase revised simplex method with Bland's rule and is
meant for the linear models produced here (a few thousand variables at most).
``solve_conic`` is an ADMM splitting method handling linear rows plus
nonnegative, zero, second-order and PSD cone memberships; its constraint
matrix is kept sparse and only the (dense) normal-equation inverse is
factored once up front.
"""

import time

import numpy as np
from scipy import sparse

from . import linalg

__all__ = ["SolverError", "SolveReport", "solve_lp", "solve_conic"]

_SQ2 = float(np.sqrt(2.0))


class SolverError(RuntimeError):
    """A solve failed in a way the caller cannot act on."""


class SolveReport:
    """Outcome of one solve.

    Attributes
    ----------
    status : str
        "optimal", "infeasible", "unbounded", "max-iter" or "numerical".
    objective : float
        Objective value in the model's own sense, evaluated at ``x``.
    iterations : int
    primal_residual, dual_residual : float
        For LP solves, worst feasibility violations at the reported point.
        For conic solves, the normalized splitting residuals; "optimal"
        means both came in at or under the requested tolerance.
    seconds : float
    x : ndarray
        Values of the model variables (best point found when not optimal).
    duals : ndarray or None
        For LPs, one multiplier per model row. Signs follow the model sense:
        in a max problem the multipliers of "le" rows come out nonnegative,
        in a min problem those of "ge" rows do.
    lb_duals, ub_duals : ndarray or None
        For LPs, bound multipliers per variable (0 without a finite bound),
        same sign policy as the rows.
    """

    def __init__(self, status, objective, iterations, primal_residual,
                 dual_residual, seconds, x=None, duals=None,
                 lb_duals=None, ub_duals=None):
        self.status = status
        self.objective = objective
        self.iterations = iterations
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
        self.seconds = seconds
        self.x = x
        self.duals = duals
        self.lb_duals = lb_duals
        self.ub_duals = ub_duals

    def to_dict(self):
        return {
            "status": self.status,
            "objective": self.objective,
            "iterations": self.iterations,
            "primalResidual": self.primal_residual,
            "dualResidual": self.dual_residual,
            "seconds": self.seconds,
        }


# -- simplex -----------------------------------------------------------


class _Simplex:
    """min c.x s.t. A x = b, x >= 0, run from a given starting basis."""

    def __init__(self, A, b, tol, basis):
        self.A = A
        self.b = b
        self.m = A.shape[0]
        self.tol = tol
        self.basis = list(basis)
        self.pivots = 0
        self._refactor()

    def _refactor(self):
        bm = self.A[:, self.basis]
        try:
            self.binv = np.linalg.inv(bm)
        except np.linalg.LinAlgError:
            self.binv = np.linalg.pinv(bm)
        self.xb = self.binv @ self.b
        np.clip(self.xb, 0.0, None, out=self.xb)

    def _pivot(self, r, j, d):
        theta = self.xb[r] / d[r]
        self.xb -= theta * d
        self.xb[r] = theta
        self.basis[r] = j
        eta = self.binv[r, :].copy()
        self.binv -= np.outer(d / d[r], eta)
        self.binv[r, :] = eta / d[r]
        self.pivots += 1
        if self.pivots % 64 == 0:
            self._refactor()
        else:
            np.clip(self.xb, 0.0, None, out=self.xb)

    def run(self, cost, ncols, max_iter):
        """Bland-rule iterations pricing the first ncols columns."""
        it = 0
        while it < max_iter:
            it += 1
            y = cost[self.basis] @ self.binv
            rc = cost[:ncols] - y @ self.A[:, :ncols]
            inbasis = np.zeros(ncols, dtype=bool)
            for v in self.basis:
                if v < ncols:
                    inbasis[v] = True
            cand = np.nonzero(~inbasis & (rc < -self.tol))[0]
            if cand.size == 0:
                return "optimal", it
            j = int(cand[0])
            d = self.binv @ self.A[:, j]
            pos = np.nonzero(d > self.tol)[0]
            if pos.size == 0:
                # a stale inverse can fake both the attractive reduced cost
                # and the missing blocking row, so recheck from a fresh
                # factorization before giving up
                self._refactor()
                y = cost[self.basis] @ self.binv
                if cost[j] - y @ self.A[:, j] >= -self.tol:
                    continue
                d = self.binv @ self.A[:, j]
                pos = np.nonzero(d > self.tol)[0]
                if pos.size == 0:
                    return "unbounded", it
            ratios = self.xb[pos] / d[pos]
            theta = np.min(ratios)
            ties = pos[ratios <= theta + 1e-12]
            # Bland: among the tied rows evict the smallest basis id
            r = int(min(ties, key=lambda i: self.basis[i]))
            self._pivot(r, j, d)
        return "max-iter", it


def solve_lp(model, tol=1e-9, max_iter=100000):
    """Solve a linear ConicModel exactly; returns a SolveReport with duals.

    Free variables are split, finite lower bounds shift the variable, and
    two-sided bounds add an explicit upper-bound row, so bound multipliers
    line up with the model's variables. Redundant equality rows detected in
    phase one are dropped (their dual is reported as 0).
    """
    if model.socs or model.psds:
        raise SolverError("solve_lp cannot handle cone blocks")
    t0 = time.perf_counter()
    nv = model.nvars
    lo = list(model.lb)
    hi = list(model.ub)
    for vid in model.nonneg:
        lo[vid] = 0.0 if lo[vid] is None else max(lo[vid], 0.0)
    for vid in model.zero:
        lo[vid] = 0.0
        hi[vid] = 0.0
    for vid in range(nv):
        if lo[vid] is not None and hi[vid] is not None and lo[vid] > hi[vid] + 1e-12:
            return SolveReport("infeasible", float("nan"), 0, float("inf"),
                               float("inf"), time.perf_counter() - t0)

    # column build: per variable either one shifted column or a +/- pair
    col_of = {}
    neg_col = {}
    shift = np.zeros(nv)
    flip = np.zeros(nv, dtype=bool)
    ncols = 0
    for vid in range(nv):
        if lo[vid] is not None:
            shift[vid] = lo[vid]
            col_of[vid] = ncols
            ncols += 1
        elif hi[vid] is not None:
            shift[vid] = hi[vid]
            flip[vid] = True
            col_of[vid] = ncols
            ncols += 1
        else:
            col_of[vid] = ncols
            neg_col[vid] = ncols + 1
            ncols += 2

    rows = []
    rhs = []
    srcs = []

    def put(coeffs, rhs_val, slack, src):
        row = np.zeros(ncols)
        base = rhs_val
        for vid, c in coeffs:
            cc = -c if flip[vid] else c
            row[col_of[vid]] += cc
            if vid in neg_col:
                row[neg_col[vid]] -= cc
            base -= c * shift[vid]
        rows.append((row, slack))
        rhs.append(base)
        srcs.append(src)

    for ridx, (coeffs, sense, rv) in enumerate(model.rows):
        slack = {"eq": 0.0, "le": 1.0, "ge": -1.0}[sense]
        put(list(coeffs.items()), rv, slack, ("row", ridx))
    for vid in range(nv):
        if lo[vid] is not None and hi[vid] is not None:
            put([(vid, 1.0)], hi[vid], 1.0 if hi[vid] > lo[vid] else 0.0,
                ("ub", vid))

    m = len(rows)
    nslack = sum(1 for _, s in rows if s != 0.0)
    A = np.zeros((m, ncols + nslack))
    b = np.zeros(m)
    k = ncols
    for i, (row, slack) in enumerate(rows):
        A[i, :ncols] = row
        b[i] = rhs[i]
        if slack != 0.0:
            A[i, k] = slack
            k += 1
    sign = np.ones(m)
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    sign[neg] = -1.0
    nall = A.shape[1]

    minimize = model.sense == "min"
    cost = np.zeros(nall)
    for vid, cv in model.objective.items():
        cc = cv if minimize else -cv
        cc = -cc if flip[vid] else cc
        cost[col_of[vid]] += cc
        if vid in neg_col:
            cost[neg_col[vid]] -= cc

    # phase 1 on [A | I] from the all-artificial basis
    A1 = np.hstack([A, np.eye(m)])
    sx = _Simplex(A1, b, tol, range(nall, nall + m))
    c1 = np.zeros(nall + m)
    c1[nall:] = 1.0
    status, it1 = sx.run(c1, nall + m, max_iter)
    feas_gap = float(c1[sx.basis] @ sx.xb)
    if status != "optimal" or feas_gap > 1e-7 * (1.0 + np.abs(b).max(initial=0.0)):
        st = "infeasible" if status == "optimal" else status
        return SolveReport(st, float("nan"), it1, feas_gap, 0.0,
                           time.perf_counter() - t0)

    # evict leftover artificials; rows they cannot leave are redundant
    sx._refactor()
    keep = np.ones(m, dtype=bool)
    basic_set = set(sx.basis)
    for i in range(m):
        if sx.basis[i] < nall:
            continue
        trow = sx.binv[i, :] @ A
        cands = np.nonzero(np.abs(trow) > 1e-9)[0]
        entered = False
        for j in cands:
            if int(j) not in basic_set:
                d = sx.binv @ A1[:, int(j)]
                basic_set.discard(sx.basis[i])
                sx._pivot(i, int(j), d)
                basic_set.add(int(j))
                entered = True
                break
        if not entered:
            keep[i] = False
    if not np.all(keep):
        rowmap = np.nonzero(keep)[0]
        A = A[keep]
        b = b[keep]
        basis = [sx.basis[i] for i in rowmap]
        sign = sign[keep]
        srcs = [srcs[i] for i in rowmap]
        m = len(b)
        sx = _Simplex(A, b, tol, basis)
    else:
        sx = _Simplex(A, b, tol, sx.basis)

    status, it2 = sx.run(cost, nall, max_iter)
    seconds = time.perf_counter() - t0
    iters = it1 + it2
    if status != "optimal":
        return SolveReport(status, float("nan"), iters, 0.0, 0.0, seconds)

    full = np.zeros(nall)
    for i, v in enumerate(sx.basis):
        full[v] = sx.xb[i]
    x = shift.copy()
    for vid in range(nv):
        val = full[col_of[vid]]
        if vid in neg_col:
            val -= full[neg_col[vid]]
        x[vid] += -val if flip[vid] else val
    obj = model.objective_value(x)

    y = cost[sx.basis] @ sx.binv
    rc = cost[:nall] - y @ A
    dual_viol = max(0.0, float(-rc.min(initial=0.0)))
    y = y * sign
    flip_dual = 1.0 if minimize else -1.0
    duals = np.zeros(len(model.rows))
    lb_duals = np.zeros(nv)
    ub_duals = np.zeros(nv)
    for i, src in enumerate(srcs):
        if src[0] == "row":
            duals[src[1]] = flip_dual * y[i]
        else:
            ub_duals[src[1]] = flip_dual * y[i]
    for vid in range(nv):
        if flip[vid]:
            ub_duals[vid] = flip_dual * rc[col_of[vid]]
        elif lo[vid] is not None:
            lb_duals[vid] = flip_dual * rc[col_of[vid]]
    res = model.residuals(x)
    prim_viol = max(res["rows"], res["bounds"], res["nonneg"], res["zero"])
    return SolveReport(status, obj, iters, prim_viol, dual_viol, seconds,
                       x=x, duals=duals, lb_duals=lb_duals, ub_duals=ub_duals)


# -- ADMM conic solver --------------------------------------------------


class _Cones:
    """Column classes of the compiled problem and their Euclidean projector."""

    def __init__(self, ncols):
        self.free = np.ones(ncols, dtype=bool)
        self.nonneg = np.zeros(ncols, dtype=bool)
        self.zero = np.zeros(ncols, dtype=bool)
        self.socs = {}        # dim -> list of column index lists
        self.psds = []        # (size, svec column indices)
        self._soc_idx = None
        self._bases = None

    def freeze(self):
        self._soc_idx = {d: np.array(g) for d, g in self.socs.items()}
        self._bases = [None] * len(self.psds)

    def project(self, v):
        out = v.copy()
        out[self.nonneg] = np.maximum(out[self.nonneg], 0.0)
        out[self.zero] = 0.0
        for d, idx in self._soc_idx.items():
            pts = out[idx]
            heads = pts[:, 0]
            tails = pts[:, 1:]
            norms = np.sqrt(np.sum(tails * tails, axis=1))
            inside = norms <= heads
            dead = norms <= -heads
            mid = ~inside & ~dead
            coef = 0.5 * (heads + norms)
            scale = np.zeros_like(norms)
            with np.errstate(divide="ignore", invalid="ignore"):
                scale[mid] = coef[mid] / norms[mid]
            pts[mid, 0] = coef[mid]
            pts[mid, 1:] *= scale[mid, None]
            pts[dead] = 0.0
            out[idx] = pts
        for bi, (size, idx) in enumerate(self.psds):
            mat = _smat(out[idx], size)
            lam, q = linalg._jacobi(mat, basis=self._bases[bi])
            self._bases[bi] = q
            if lam[-1] < 0.0:
                keep = lam > 0.0
                qk = q[:, keep]
                mat = (qk * lam[keep]) @ qk.T
                out[idx] = _svec(mat)
        return out


def _tri_indices(size):
    ii = []
    jj = []
    for i in range(size):
        for j in range(i + 1):
            ii.append(i)
            jj.append(j)
    return np.array(ii), np.array(jj)


_TRI_CACHE = {}


def _tri(size):
    if size not in _TRI_CACHE:
        _TRI_CACHE[size] = _tri_indices(size)
    return _TRI_CACHE[size]


def _svec(mat):
    size = mat.shape[0]
    ii, jj = _tri(size)
    out = mat[ii, jj].copy()
    out[ii != jj] *= _SQ2
    return out


def _smat(vec, size):
    ii, jj = _tri(size)
    v = vec.copy()
    v[ii != jj] /= _SQ2
    mat = np.zeros((size, size))
    mat[ii, jj] = v
    mat[jj, ii] = v
    return mat


def _compile_conic(model):
    """Rewrite a sealed model as min c.v, A v = b, v in K with K separable.

    Cone members get private svec-scaled copies tied by equality rows, so
    every column lands in exactly one class and the z-projection splits.
    """
    nv = model.nvars
    ncols = nv
    entries = []
    b = []

    def add_row(cols, vals, rv):
        r = len(b)
        for cc, vv in zip(cols, vals):
            entries.append((r, cc, vv))
        b.append(rv)

    extra = []
    for coeffs, sense, rv in model.rows:
        cols = list(coeffs)
        vals = [coeffs[c] for c in cols]
        if sense == "eq":
            add_row(cols, vals, rv)
        else:
            s = ncols
            ncols += 1
            extra.append(s)
            add_row(cols + [s], vals + [1.0 if sense == "le" else -1.0], rv)
    for vid in range(nv):
        if model.lb[vid] is not None:
            s = ncols
            ncols += 1
            extra.append(s)
            add_row([vid, s], [1.0, -1.0], model.lb[vid])
        if model.ub[vid] is not None:
            s = ncols
            ncols += 1
            extra.append(s)
            add_row([vid, s], [1.0, 1.0], model.ub[vid])
    soc_groups = []
    for ids in model.socs:
        grp = list(range(ncols, ncols + len(ids)))
        ncols += len(ids)
        for cc, vid in zip(grp, ids):
            add_row([cc, vid], [1.0, -1.0], 0.0)
        soc_groups.append(grp)
    psd_groups = []
    for ids in model.psds:
        size = int(round((np.sqrt(8 * len(ids) + 1) - 1) / 2))
        grp = list(range(ncols, ncols + len(ids)))
        ncols += len(ids)
        ii, jj = _tri(size)
        for k in range(len(ids)):
            w = 1.0 if ii[k] == jj[k] else _SQ2
            add_row([grp[k], ids[k]], [1.0, -w], 0.0)
        psd_groups.append((size, grp))

    m = len(b)
    rsel = np.array([e[0] for e in entries], dtype=np.int64)
    csel = np.array([e[1] for e in entries], dtype=np.int64)
    vsel = np.array([e[2] for e in entries], dtype=float)
    A = sparse.csr_matrix((vsel, (rsel, csel)), shape=(m, ncols))
    b = np.array(b, dtype=float)

    cones = _Cones(ncols)
    for cc in extra:
        cones.nonneg[cc] = True
        cones.free[cc] = False
    for vid in model.nonneg:
        cones.nonneg[vid] = True
        cones.free[vid] = False
    for vid in model.zero:
        cones.zero[vid] = True
        cones.nonneg[vid] = False
        cones.free[vid] = False
    for grp in soc_groups:
        cones.socs.setdefault(len(grp), []).append(grp)
        for cc in grp:
            cones.free[cc] = False
    for size, grp in psd_groups:
        cones.psds.append((size, np.array(grp)))
        for cc in grp:
            cones.free[cc] = False
    cones.freeze()

    c = np.zeros(ncols)
    sgn = 1.0 if model.sense == "min" else -1.0
    for vid, cv in model.objective.items():
        c[vid] = sgn * cv
    return A, b, c, cones


def solve_conic(model, tol=1e-6, max_iter=200000):
    """ADMM solve of a conic model.

    Parameters
    ----------
    model : ConicModel
    tol : float
        Absolute and relative residual target.
    max_iter : int

    Returns
    -------
    SolveReport
        ``x`` holds the model variables read off the cone-feasible iterate.
    """
    t0 = time.perf_counter()
    A, b, c, cones = _compile_conic(model)
    m, ncols = A.shape

    # row equilibration keeps the single factorization well scaled
    norms = np.sqrt(np.asarray(A.multiply(A).sum(axis=1)).ravel())
    norms = np.clip(norms, 1e-8, None)
    A = (sparse.diags(1.0 / norms) @ A).tocsr()
    b = b / norms

    M = (A @ A.T).toarray()
    # models may carry exactly dependent (consistent) equality rows, so the
    # normal matrix is regularized before the one-time inversion; the rhs
    # always lies in its range, making the shift benign
    M[np.diag_indices(m)] += 1e-8
    try:
        Minv = np.linalg.inv(M)
    except np.linalg.LinAlgError:
        Minv = np.linalg.pinv(M)
    if not np.all(np.isfinite(Minv)):
        Minv = np.linalg.pinv(M)
    At = A.T.tocsr()
    Ac = A @ c

    rho = 1.0
    alpha = 1.6
    z = np.zeros(ncols)
    u = np.zeros(ncols)
    scale = float(np.sqrt(ncols))
    best = None
    status = "max-iter"
    rp = rd = float("inf")
    it = 0
    while it < max_iter:
        it += 1
        v = z - u
        nu = Minv @ (rho * (A @ v - b) - Ac)
        x = v - (c + At @ nu) / rho
        xhat = alpha * x + (1.0 - alpha) * z
        znew = cones.project(xhat + u)
        u += xhat - znew
        # residuals normalized by the convergence scales, so both come in
        # at or under tol exactly when the stop test fires
        rp = float(np.linalg.norm(x - znew)) / (
            scale + max(np.linalg.norm(x), np.linalg.norm(znew)))
        rd = float(rho * np.linalg.norm(znew - z)) / (
            scale + rho * np.linalg.norm(u))
        z = znew
        if not np.isfinite(rp) or not np.isfinite(rd):
            status = "numerical"
            break
        gauge = max(rp, rd)
        if best is None or gauge < best[0]:
            best = (gauge, z.copy(), rp, rd)
        if rp <= tol and rd <= tol:
            status = "optimal"
            break
        if it % 100 == 0:
            if rp > 10.0 * rd:
                rho *= 2.0
                u *= 0.5
            elif rd > 10.0 * rp:
                rho *= 0.5
                u *= 2.0
    seconds = time.perf_counter() - t0
    if status == "optimal" or best is None:
        zout, rp_out, rd_out = z, rp, rd
    else:
        zout, rp_out, rd_out = best[1], best[2], best[3]
    xvals = zout[:model.nvars].copy()
    sgn = 1.0 if model.sense == "min" else -1.0
    obj = sgn * float(c[:model.nvars] @ xvals)
    return SolveReport(status, obj, it, rp_out, rd_out, seconds, x=xvals)
