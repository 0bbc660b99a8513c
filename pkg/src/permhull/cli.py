"""Command-line surface.

Results go to stdout (JSON for single answers, CSV for tables), diagnostics
to stderr.  Exit codes: 0 success, 2 input error, 3 solver failure.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import envelope, ksupport, majorization, model, spca, transport
from .solvers import SolverError


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValueError("cannot read %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ValueError("%s is not valid JSON: %s" % (path, exc))


def _load_vector(path):
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("values")
    vec = np.asarray(data, dtype=float)
    if vec.ndim != 1 or vec.size == 0:
        raise ValueError("%s must hold a nonempty flat array" % path)
    return vec


def _load_matrix(path):
    data = _load_json(path)
    if isinstance(data, dict):
        data = data.get("matrix")
    mat = np.asarray(data, dtype=float)
    if mat.ndim != 2:
        raise ValueError("%s must hold a matrix as a list of rows" % path)
    return mat


def _parse_box(spec):
    parts = str(spec).split(",")
    if len(parts) != 3:
        raise ValueError("--box expects a,b,n")
    return envelope.Box(float(parts[0]), float(parts[1]), int(parts[2]))


def _load_instance(args):
    spec = args.matrix
    k = getattr(args, "k", None)
    if spec == "pitprops":
        if k is None:
            raise ValueError("--k is required with the pitprops matrix")
        return spca.pitprops_instance(k)
    if spec.startswith("random:"):
        parts = spec[len("random:"):].split(",")
        if len(parts) != 2:
            raise ValueError("--matrix random expects random:n,seed")
        inst = spca.random_instance(int(parts[0]), int(parts[1]))
        if k is not None and k != inst.K:
            inst = spca.SpcaInstance(inst.sigma, k, provenance=inst.provenance)
        return inst
    data = _load_json(spec)
    if not isinstance(data, dict):
        raise ValueError("%s must hold an instance object" % spec)
    if k is not None:
        data = dict(data, K=k)
    return spca.SpcaInstance.from_dict(data)


def _emit_json(payload):
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")


# -- subcommands ---------------------------------------------------------


def _cmd_knorm(args):
    x = _load_vector(args.input)
    cert = ksupport.sparsity_certificate(x, args.k, norm=args.norm)
    side = ksupport.membership(x, args.k, args.norm, 1.0)
    out = {
        "schema": "knorm/1",
        "cNorm": cert.c_norm,
        "uX": [float(v) for v in cert.u_x],
        "membership": side,
    }
    if side == "outside":
        coeffs, rhs = ksupport.separating_hyperplane(x, args.k, norm=args.norm)
        out["hyperplane"] = {"coefficients": [float(v) for v in coeffs],
                             "rhs": rhs}
    _emit_json(out)


def _gap_fields(z_e, z_r):
    gap = z_e - z_r
    pct = 100.0 * gap / abs(z_e) if abs(z_e) > 1e-12 else 0.0
    return gap, pct


def _cmd_envelope(args):
    box = _parse_box(args.box)
    x = _load_vector(args.point)
    z_e = envelope.multilinear_envelope(x, box)
    out = {"schema": "envelope/1",
           "box": {"a": box.a, "b": box.b, "n": box.n},
           "envelope": z_e}
    if args.compare_mccormick:
        z_r = envelope.mccormick_relax(x, box)
        gap, pct = _gap_fields(z_e, z_r)
        out.update(mccormick=z_r, gap=gap, percentGap=pct)
    _emit_json(out)


def _cmd_envelope_table(args):
    box = _parse_box(args.box)
    rng = np.random.default_rng(args.seed)
    pts = rng.uniform(box.a, box.b, size=(args.samples, box.n))
    writer = csv.writer(sys.stdout)
    writer.writerow(["Sample", "z_e", "z_r", "Gap", "%Gap"])
    sums = np.zeros(4)
    for idx in range(args.samples):
        z_e = envelope.multilinear_envelope(pts[idx], box)
        z_r = envelope.mccormick_relax(pts[idx], box)
        gap, pct = _gap_fields(z_e, z_r)
        sums += (z_e, z_r, gap, pct)
        writer.writerow([idx + 1, "%.4f" % z_e, "%.4f" % z_r,
                         "%.4f" % gap, "%.1f" % pct])
    avg = sums / args.samples
    writer.writerow(["Average", "%.4f" % avg[0], "%.4f" % avg[1],
                     "%.4f" % avg[2], "%.1f" % avg[3]])


def _cmd_spca(args):
    inst = _load_instance(args)
    if args.action == "exact":
        value, support, x = spca.exact_spca(inst)
        _emit_json({"schema": "spca-exact/1", "value": value,
                    "support": list(support),
                    "x": [float(v) for v in x]})
        return
    kinds = [spca.relaxation_kind(k) for k in (args.kind or [])]
    if args.action == "solve":
        if len(kinds) != 1:
            raise ValueError("spca solve expects exactly one --kind")
        rep = spca.solve_relaxation(inst, kinds[0], tol=args.tol,
                                    maj_form=args.maj_form)
        _emit_json({"schema": "spca-solve/1", "kind": kinds[0],
                    "report": rep.to_dict()})
        return
    if not kinds:
        kinds = list(spca.KINDS)
    report = spca.gap_report(inst, kinds, tol=args.tol,
                             maj_form=args.maj_form)
    writer = csv.writer(sys.stdout)
    writer.writerow(["K", "kind", "zStar", "zD", "zRelax",
                     "gapClosedPercent", "seconds"])
    for kind in kinds:
        gap = report.gap_closed[kind]
        writer.writerow([
            inst.K, kind,
            "%.6f" % report.z_star, "%.6f" % report.z_d,
            "%.6f" % report.z_relax[kind],
            "" if gap is None else "%.2f" % gap,
            "%.3f" % report.seconds.get(kind, report.seconds["D"]),
        ])


def _cmd_export(args):
    spec = args.model
    if spec.startswith("spca:"):
        inst = _load_instance(args)
        built = spca.build_relaxation(inst, spec[len("spca:"):],
                                      maj_form=args.maj_form)
    elif spec == "transport":
        if args.weights is None:
            raise ValueError("--weights is required with the transport model")
        W = _load_matrix(args.weights)
        built = transport.transport_model(W, args.p, args.q, args.r)
    else:
        raise ValueError("unknown model spec %r" % spec)
    try:
        if args.format == "lp":
            text = model.export_lp(built)
        else:
            text = model.export_sdpa(built)
    except model.CapabilityError as exc:
        raise ValueError(str(exc))
    with open(args.out, "w") as fh:
        fh.write(text)
    print("wrote %s" % args.out, file=sys.stderr)


def _cmd_birkhoff(args):
    mat = _load_matrix(args.matrix)
    dec = majorization.birkhoff(mat)
    _emit_json({
        "schema": "birkhoff/1",
        "n": dec.n,
        "weights": [float(v) for v in dec.weights],
        "permutations": [[int(v) for v in p] for p in dec.permutations],
    })


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="permhull",
        description="Permutation/sign-invariant convexification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("knorm", help="K-support gauge, witness, membership")
    p.add_argument("--input", required=True, help="JSON vector file")
    p.add_argument("--k", type=int, required=True, help="sparsity budget K")
    p.add_argument("--norm", default="l2",
                   help="base norm: l2, linf, or lp:P (default l2)")
    p.set_defaults(func=_cmd_knorm)

    p = sub.add_parser("envelope",
                       help="coordinate-product envelope at a point")
    p.add_argument("--box", required=True, help="symmetric box as a,b,n")
    p.add_argument("--point", required=True, help="JSON vector file")
    p.add_argument("--compare-mccormick", action="store_true",
                   help="also report the recursive McCormick bound and gap")
    p.set_defaults(func=_cmd_envelope)

    p = sub.add_parser("envelope-table",
                       help="CSV gap table over uniform samples")
    p.add_argument("--box", required=True, help="symmetric box as a,b,n")
    p.add_argument("--samples", type=int, default=9)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_envelope_table)

    p = sub.add_parser("spca", help="sparse PCA oracle and relaxations")
    p.add_argument("action", choices=["exact", "solve", "gaps"])
    p.add_argument("--matrix", required=True,
                   help="pitprops, random:n,seed, or an instance JSON file")
    p.add_argument("--k", type=int, help="sparsity budget K")
    p.add_argument("--kind", action="append",
                   help="relaxation kind (repeatable): D B rowsum diag "
                        "2step submat T")
    p.add_argument("--maj-form", default="dual", choices=["dual", "sortnet"],
                   help="majorization row form for the profile family")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_spca)

    p = sub.add_parser("export", help="write a built model as LP/SDPA text")
    p.add_argument("--model", required=True,
                   help="spca:<kind> (with --matrix/--k) or transport "
                        "(with --weights/--p/--q/--r)")
    p.add_argument("--matrix", help="instance source for spca models")
    p.add_argument("--k", type=int, help="sparsity budget K for spca models")
    p.add_argument("--maj-form", default="dual", choices=["dual", "sortnet"])
    p.add_argument("--weights", help="JSON weight matrix for transport")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--format", required=True, choices=["lp", "sdpa"])
    p.add_argument("--out", required=True, help="output path")
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("birkhoff",
                       help="decompose a doubly stochastic matrix")
    p.add_argument("--matrix", required=True, help="JSON matrix file")
    p.set_defaults(func=_cmd_birkhoff)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        args.func(args)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (SolverError, majorization.DegeneracyError) as exc:
        print("solver failure: %s" % exc, file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
