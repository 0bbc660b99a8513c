"""Block-structured conic model IR plus row emitters and file exporters.

A ConicModel is built row by row (single writer), then sealed. Sealed models
are immutable and safe to hand to solvers or exporters from several threads.
Variables are referenced by integer id everywhere; emitters also accept plain
floats in place of ids, which pins that entry to a constant.
"""

import numpy as np

from . import linalg

__all__ = [
    "CapabilityError",
    "ConicModel",
    "ComparatorNetwork",
    "emit_majorization",
    "emit_weak_majorization",
    "bitonic_network",
    "emit_sorting_majorization",
    "export_lp",
    "export_sdpa",
    "parse_lp",
]


class CapabilityError(RuntimeError):
    """The requested export/solve cannot represent part of the model."""


class ConicModel:
    """Variables, linear rows, and cone memberships."""

    def __init__(self, name="model", sense="min"):
        self.name = name
        self.sense = sense
        self.var_names = []
        self.lb = []
        self.ub = []
        self.rows = []          # (coeffs dict, sense in {eq,le,ge}, rhs)
        self.nonneg = []        # var ids, insertion order
        self.zero = []
        self.socs = []          # [head, tail...] id lists
        self.psds = []          # lower-triangular row-major id lists
        self.objective = {}
        self._names = set()
        self._sealed = False
        self._fresh = 0

    # -- construction ------------------------------------------------

    def _check_open(self):
        if self._sealed:
            raise ValueError("model is sealed")

    def add_var(self, name=None, lb=None, ub=None):
        self._check_open()
        vid = len(self.var_names)
        if name is None:
            name = "v%d" % vid
        if any(ch.isspace() for ch in name):
            raise ValueError("variable name contains whitespace: %r" % name)
        if name in self._names:
            raise ValueError("duplicate variable name: %r" % name)
        if lb is not None and ub is not None and lb > ub:
            raise ValueError("lb > ub for %r" % name)
        self._names.add(name)
        self.var_names.append(name)
        self.lb.append(None if lb is None else float(lb))
        self.ub.append(None if ub is None else float(ub))
        return vid

    def add_vars(self, count, prefix, lb=None, ub=None):
        return [self.add_var("%s%d" % (prefix, i), lb, ub) for i in range(count)]

    def fresh_prefix(self, tag):
        self._fresh += 1
        return "%s%d" % (tag, self._fresh)

    def _check_ids(self, ids):
        for vid in ids:
            if not (isinstance(vid, (int, np.integer)) and 0 <= vid < len(self.var_names)):
                raise ValueError("unknown variable id %r" % (vid,))

    def _merge(self, coeffs):
        merged = {}
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        for vid, c in items:
            c = float(c)
            if c != 0.0:
                vid = int(vid)
                merged[vid] = merged.get(vid, 0.0) + c
        self._check_ids(merged)
        return merged

    def add_row(self, coeffs, sense, rhs):
        self._check_open()
        if sense not in ("eq", "le", "ge"):
            raise ValueError("row sense must be eq/le/ge")
        self.rows.append((self._merge(coeffs), sense, float(rhs)))
        return len(self.rows) - 1

    def set_objective(self, sense, coeffs):
        self._check_open()
        if sense not in ("min", "max"):
            raise ValueError("objective sense must be min or max")
        self.sense = sense
        self.objective = self._merge(coeffs)

    def add_nonneg(self, ids):
        self._check_open()
        ids = [int(i) for i in ids]
        self._check_ids(ids)
        self.nonneg.extend(ids)

    def add_zero(self, ids):
        self._check_open()
        ids = [int(i) for i in ids]
        self._check_ids(ids)
        self.zero.extend(ids)

    def add_soc(self, ids):
        """Second-order cone: ids[0] bounds the 2-norm of ids[1:]."""
        self._check_open()
        ids = [int(i) for i in ids]
        if len(ids) < 2:
            raise ValueError("second-order cone needs a head and a tail")
        self._check_ids(ids)
        self.socs.append(ids)
        return len(self.socs) - 1

    def add_psd(self, ids):
        """PSD block; ids list the lower triangle row-major: (0,0),(1,0),(1,1),..."""
        self._check_open()
        ids = [int(i) for i in ids]
        self._check_ids(ids)
        _tri_order(len(ids))
        self.psds.append(ids)
        return len(self.psds) - 1

    def seal(self):
        self._sealed = True
        return self

    @property
    def sealed(self):
        return self._sealed

    @property
    def nvars(self):
        return len(self.var_names)

    # -- inspection ---------------------------------------------------

    def psd_matrix(self, block, point):
        """Materialize PSD block ``block`` of a point as a symmetric matrix."""
        ids = self.psds[block]
        size = _tri_order(len(ids))
        m = np.zeros((size, size))
        k = 0
        for i in range(size):
            for j in range(i + 1):
                m[i, j] = m[j, i] = point[ids[k]]
                k += 1
        return m

    def residuals(self, point):
        """Worst violation of each structural element class at ``point``.

        Useful for validating hand-built feasible points constraint by
        constraint. Values are 0 when the class is absent or satisfied.
        """
        x = np.asarray(point, dtype=float)
        if x.shape != (self.nvars,):
            raise ValueError("point has wrong length")
        worst = {"rows": 0.0, "bounds": 0.0, "nonneg": 0.0, "zero": 0.0,
                 "soc": 0.0, "psd": 0.0}
        for coeffs, sense, rhs in self.rows:
            lhs = sum(c * x[v] for v, c in coeffs.items())
            if sense == "eq":
                viol = abs(lhs - rhs)
            elif sense == "le":
                viol = lhs - rhs
            else:
                viol = rhs - lhs
            worst["rows"] = max(worst["rows"], viol)
        for vid in range(self.nvars):
            if self.lb[vid] is not None:
                worst["bounds"] = max(worst["bounds"], self.lb[vid] - x[vid])
            if self.ub[vid] is not None:
                worst["bounds"] = max(worst["bounds"], x[vid] - self.ub[vid])
        for vid in self.nonneg:
            worst["nonneg"] = max(worst["nonneg"], -x[vid])
        for vid in self.zero:
            worst["zero"] = max(worst["zero"], abs(x[vid]))
        for ids in self.socs:
            worst["soc"] = max(worst["soc"], float(np.linalg.norm(x[ids[1:]]) - x[ids[0]]))
        for b in range(len(self.psds)):
            lam, _ = linalg._jacobi(self.psd_matrix(b, x))
            worst["psd"] = max(worst["psd"], -float(lam[-1]))
        return worst

    def objective_value(self, point):
        return float(sum(c * point[v] for v, c in self.objective.items()))


def _tri_order(count):
    size = int(round((np.sqrt(8 * count + 1) - 1) / 2))
    if size * (size + 1) // 2 != count:
        raise ValueError("PSD block needs a triangular number of entries, got %d" % count)
    return size


# -- majorization emitters --------------------------------------------


def _split_terms(items):
    """Map a mixed id/constant sequence to {position: id} and a constant vector."""
    ids_at = {}
    consts = np.zeros(len(items))
    for k, it in enumerate(items):
        if isinstance(it, (int, np.integer)):
            ids_at[k] = int(it)
        else:
            consts[k] = float(it)
    return ids_at, consts


def _emit_dominance(model, big, small, js, total_equality, tag):
    """Rows stating that for each j in js the sum of the j largest entries of
    ``small`` is at most the sum of the first j entries of ``big``.

    Uses the LP-duality linearization of "sum of the j largest": fresh r_j
    and t_{ij} >= 0 with  sum_{i<=j} big_i >= j*r_j + sum_i t_{ij}  and
    small_i <= t_{ij} + r_j for every i. ``total_equality`` additionally ties
    the two totals, upgrading the dominance rows to full majorization.
    """
    if len(big) != len(small):
        raise ValueError("dominance sides have different lengths")
    n = len(small)
    pfx = model.fresh_prefix(tag)
    big_at, big_consts = _split_terms(big)
    small_at, small_consts = _split_terms(small)
    row_ids = []
    for j in js:
        r = model.add_var("%s_r%d" % (pfx, j))
        t = model.add_vars(n, "%s_t%d_" % (pfx, j))
        model.add_nonneg(t)
        coeffs = [(big_at[k], 1.0) for k in range(j) if k in big_at]
        coeffs.append((r, -float(j)))
        coeffs.extend((ti, -1.0) for ti in t)
        row_ids.append(model.add_row(coeffs, "ge", -float(np.sum(big_consts[:j]))))
        for i in range(n):
            coeffs = [(t[i], -1.0), (r, -1.0)]
            rhs = 0.0
            if i in small_at:
                coeffs.append((small_at[i], 1.0))
            else:
                rhs = -small_consts[i]
            row_ids.append(model.add_row(coeffs, "le", rhs))
    if total_equality:
        coeffs = [(vid, 1.0) for vid in big_at.values()]
        coeffs.extend((vid, -1.0) for vid in small_at.values())
        rhs = float(np.sum(small_consts) - np.sum(big_consts))
        row_ids.append(model.add_row(coeffs, "eq", rhs))
    return row_ids


def emit_majorization(model, u, x):
    """Rows forcing u to majorize x (u entries taken in the given order as the
    descending representative; callers add the descending chain on u when u is
    variable). Adds the j=1..n-1 duality blocks plus the total-sum equality.
    """
    n = len(u)
    return _emit_dominance(model, list(u), list(x), range(1, n), True, "maj")


def emit_weak_majorization(model, u, x_abs):
    """Rows forcing u to weakly majorize x_abs from above: all j=1..n
    dominance blocks, no total-sum equality."""
    n = len(u)
    return _emit_dominance(model, list(u), list(x_abs), range(1, n + 1), False, "wmaj")


# -- sorting networks --------------------------------------------------


class ComparatorNetwork:
    """A fixed comparator sequence on ``wires`` wires.

    Comparators are (a, b) pairs with a < b; executing one puts the larger
    value on wire a, so a full pass leaves the wire vector sorted descending.
    """

    def __init__(self, wires, comparators):
        self.wires = wires
        self.comparators = list(comparators)

    def __len__(self):
        return len(self.comparators)

    def simulate(self, values):
        out = list(values)
        if len(out) != self.wires:
            raise ValueError("expected %d values" % self.wires)
        for a, b in self.comparators:
            if out[b] > out[a]:
                out[a], out[b] = out[b], out[a]
        return out


def bitonic_network(n):
    """Batcher bitonic sorting network on n wires, descending order.

    Built for the next power of two with all comparators oriented the same
    way (mirror first, then shifted substages); trailing pad wires would hold
    a value below every real input and never move, so comparators touching
    them are dropped. For n = 2^k the comparator count is (n/2)*k*(k+1)/2.
    """
    if n < 1:
        raise ValueError("need at least one wire")
    np2 = 1
    while np2 < n:
        np2 *= 2
    comps = []
    size = 2
    while size <= np2:
        half = size // 2
        for b0 in range(0, np2, size):
            for i in range(half):
                a, b = b0 + i, b0 + size - 1 - i
                if b < n:
                    comps.append((a, b))
        gap = size // 4
        while gap >= 1:
            for i in range(np2):
                if (i % (2 * gap)) < gap and i + gap < n:
                    comps.append((i, i + gap))
            gap //= 2
        size *= 2
    return ComparatorNetwork(n, comps)


def _affine_row(model, plus, minus, sense):
    """Row stating sum(plus) - sum(minus) (sense) 0, items being ids or consts."""
    coeffs = []
    rhs = 0.0
    for it in plus:
        if isinstance(it, (int, np.integer)):
            coeffs.append((int(it), 1.0))
        else:
            rhs -= float(it)
    for it in minus:
        if isinstance(it, (int, np.integer)):
            coeffs.append((int(it), -1.0))
        else:
            rhs += float(it)
    if not coeffs:
        violated = (sense == "eq" and abs(rhs) > 1e-12) \
            or (sense == "ge" and rhs > 1e-12) \
            or (sense == "le" and rhs < -1e-12)
        if violated:
            raise ValueError("constant row is infeasible")
        return None
    return model.add_row(coeffs, sense, rhs)


def _final_outputs(network):
    """For each comparator, whether its (high, low) output positions are
    untouched by every later comparator, i.e. already final."""
    seen = set()
    finals = [None] * len(network.comparators)
    for idx in range(len(network.comparators) - 1, -1, -1):
        a, b = network.comparators[idx]
        finals[idx] = (a not in seen, b not in seen)
        seen.add(a)
        seen.add(b)
    return finals, seen


def emit_sorting_majorization(model, u, x, network=None):
    """Comparator-network rows whose projection onto (u, x) is u >=_m x.

    Each comparator on current wire values (p, q) produces (hi, lo) with
    hi >= p, hi >= q, hi + lo = p + q. Outputs landing on a wire position no
    later comparator touches are the sorted result there, so the matching u
    entry stands in directly; interior outputs get fresh variables. Size is
    Theta(n log^2 n) for the bitonic network.
    """
    if len(u) != len(x):
        raise ValueError("u and x have different lengths")
    n = len(x)
    if network is None:
        network = bitonic_network(n)
    if network.wires != n:
        raise ValueError("network size %d does not match n=%d" % (network.wires, n))
    finals, touched = _final_outputs(network)
    pfx = model.fresh_prefix("sort")
    wires = list(x)
    row_ids = []
    for idx, (a, b) in enumerate(network.comparators):
        a_done, b_done = finals[idx]
        hi = u[a] if a_done else model.add_var("%s_h%d" % (pfx, idx))
        lo = u[b] if b_done else model.add_var("%s_l%d" % (pfx, idx))
        for rid in (_affine_row(model, [hi], [wires[a]], "ge"),
                    _affine_row(model, [hi], [wires[b]], "ge"),
                    _affine_row(model, [hi, lo], [wires[a], wires[b]], "eq")):
            if rid is not None:
                row_ids.append(rid)
        wires[a], wires[b] = hi, lo
    for i in range(n):
        if i not in touched:
            rid = _affine_row(model, [wires[i]], [u[i]], "eq")
            if rid is not None:
                row_ids.append(rid)
    return row_ids


# -- text formats -------------------------------------------------------


def _fmt_bound(v):
    return "*" if v is None else repr(v)


def export_lp(model):
    """Serialize a linear model to the canonical LP text dialect.

    One declaration per line, variables in declaration order, row terms in
    ascending variable id; floats are written with repr so the text round
    trips losslessly through parse_lp. Cone blocks are not representable.
    """
    if model.psds:
        raise CapabilityError("LP text cannot express PSD blocks")
    if model.socs:
        raise CapabilityError("LP text cannot express second-order cone blocks")
    out = ["permhull-lp 1", "name %s" % model.name, "sense %s" % model.sense]
    for vid, name in enumerate(model.var_names):
        out.append("var %s %s %s" % (name, _fmt_bound(model.lb[vid]), _fmt_bound(model.ub[vid])))
    for vid in model.nonneg:
        out.append("nonneg %s" % model.var_names[vid])
    for vid in model.zero:
        out.append("zero %s" % model.var_names[vid])
    for vid in sorted(model.objective):
        out.append("obj %s %r" % (model.var_names[vid], model.objective[vid]))
    for coeffs, sense, rhs in model.rows:
        terms = " ".join("%s %r" % (model.var_names[v], coeffs[v]) for v in sorted(coeffs))
        out.append(("row %s %r %s" % (sense, rhs, terms)).rstrip())
    return "\n".join(out) + "\n"


def parse_lp(text):
    """Parse the canonical LP text dialect back into a ConicModel."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "permhull-lp 1":
        raise ValueError("not a permhull-lp 1 document")
    m = ConicModel()
    ids = {}
    obj = []
    for ln in lines[1:]:
        parts = ln.split()
        kind = parts[0]
        if kind == "name":
            m.name = parts[1] if len(parts) > 1 else ""
        elif kind == "sense":
            m.sense = parts[1]
        elif kind == "var":
            name = parts[1]
            lb = None if parts[2] == "*" else float(parts[2])
            ub = None if parts[3] == "*" else float(parts[3])
            ids[name] = m.add_var(name, lb, ub)
        elif kind == "nonneg":
            m.add_nonneg([ids[parts[1]]])
        elif kind == "zero":
            m.add_zero([ids[parts[1]]])
        elif kind == "obj":
            obj.append((ids[parts[1]], float(parts[2])))
        elif kind == "row":
            sense = parts[1]
            rhs = float(parts[2])
            coeffs = [(ids[parts[k]], float(parts[k + 1])) for k in range(3, len(parts), 2)]
            m.add_row(coeffs, sense, rhs)
        else:
            raise ValueError("unknown declaration %r" % kind)
    m.set_objective(m.sense, obj)
    return m


def export_sdpa(model):
    """Serialize to SDPA sparse ".dat-s" text.

    The model's variables become the SDPA y-vector in declaration order and
    every structural element becomes a slot of the block-diagonal constraint
    sum_k y_k F_k - F_0 >= 0: one block per PSD variable block, one arrow
    block per second-order cone, and a final diagonal block holding linear
    rows (equalities as two slots), variable bounds, nonneg and zero
    memberships. SDPA minimizes, so a max objective is negated; the SDPA
    optimum then equals minus the model optimum.
    """
    nv = model.nvars
    blocks = []           # sizes, negative for the diagonal block
    entries = []          # (matno, block, i, j, value) with i <= j
    for ids in model.psds:
        blocks.append(_tri_order(len(ids)))
        bno = len(blocks)
        k = 0
        for i in range(blocks[-1]):
            for j in range(i + 1):
                entries.append((ids[k] + 1, bno, j + 1, i + 1, 1.0))
                k += 1
    for ids in model.socs:
        d = len(ids) - 1
        blocks.append(d + 1)
        bno = len(blocks)
        entries.append((ids[0] + 1, bno, 1, 1, 1.0))
        for j in range(1, d + 1):
            entries.append((ids[0] + 1, bno, j + 1, j + 1, 1.0))
            entries.append((ids[j] + 1, bno, 1, j + 1, 1.0))
    diag = []             # (coeff dict, rhs) meaning sum c_k y_k - rhs >= 0

    def ge_slot(coeffs, rhs):
        diag.append((coeffs, rhs))

    for coeffs, sense, rhs in model.rows:
        if sense in ("ge", "eq"):
            ge_slot(coeffs, rhs)
        if sense in ("le", "eq"):
            ge_slot({v: -c for v, c in coeffs.items()}, -rhs)
    for vid in range(nv):
        if model.lb[vid] is not None:
            ge_slot({vid: 1.0}, model.lb[vid])
        if model.ub[vid] is not None:
            ge_slot({vid: -1.0}, -model.ub[vid])
    for vid in model.nonneg:
        ge_slot({vid: 1.0}, 0.0)
    for vid in model.zero:
        ge_slot({vid: 1.0}, 0.0)
        ge_slot({vid: -1.0}, 0.0)
    if diag:
        blocks.append(-len(diag))
        bno = len(blocks)
        for slot, (coeffs, rhs) in enumerate(diag, start=1):
            if rhs != 0.0:
                entries.append((0, bno, slot, slot, rhs))
            for vid in sorted(coeffs):
                entries.append((vid + 1, bno, slot, slot, coeffs[vid]))
    sign = -1.0 if model.sense == "max" else 1.0
    c = [sign * model.objective[vid] if vid in model.objective else 0.0
         for vid in range(nv)]
    out = [str(nv), str(len(blocks)), " ".join(str(b) for b in blocks),
           " ".join(repr(v) for v in c)]
    entries.sort(key=lambda e: (e[0], e[1], e[2], e[3]))
    for matno, bno, i, j, val in entries:
        out.append("%d %d %d %d %r" % (matno, bno, i, j, val))
    return "\n".join(out) + "\n"
