"""End-to-end checks of the shipped numerical guarantees, one line each."""

import time
from itertools import product as bit_patterns
from pathlib import Path

import numpy as np
import pytest

from permhull import envelope, ksupport, spca, transport
from permhull.envelope import Box
from permhull.majorization import birkhoff, majorizes, transport_matrix
from permhull.model import (ConicModel, emit_majorization,
                            emit_sorting_majorization, export_lp, export_sdpa,
                            parse_lp)
from permhull.solvers import solve_lp

GOLDEN = Path(__file__).parent / "golden"


def test_01_sparsity_certificate_worked_example():
    x = np.array([27.0, 5.0, 4.0, 3.0, 2.0, 1.0]) / 28.0
    cert = ksupport.sparsity_certificate(x, 3)
    assert np.max(np.abs(cert.s - np.array([28.0, 15.0, 20.0]) / 56.0)) <= 1e-12
    u_expected = np.array([27.0 / 28.0, 15.0 / 56.0, 15.0 / 56.0, 0.0, 0.0, 0.0])
    assert np.max(np.abs(cert.u_x - u_expected)) <= 1e-12
    assert cert.c_norm == pytest.approx(1.0360, abs=5e-4)
    assert ksupport.membership(x, 3, "l2", 1.0) == "outside"
    assert float(cert.chi @ x) == pytest.approx(cert.c_norm, abs=1e-9)
    # the best support keeps the largest magnitudes, so the max of the
    # restricted two-norm over all size-3 supports is the top-3 norm
    top = np.sort(np.abs(cert.chi))[::-1][:3]
    assert float(np.linalg.norm(top)) == pytest.approx(1.0, abs=1e-9)


def test_02_window_formula_agrees_with_witness_norm():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    for trial in range(500):
        n = int(rng.integers(3, 11))
        K = int(rng.integers(2, n))
        x = rng.normal(size=n) * rng.uniform(0.5, 3.0)
        if trial % 5 == 0:
            x = np.round(x, 1)
        if trial % 7 == 0:
            x[int(rng.integers(0, n))] = 0.0
        if not np.any(x):
            x[0] = 1.0
        cert = ksupport.sparsity_certificate(x, K)
        val = ksupport.k_support_norm(x, K)
        assert abs(val - float(np.linalg.norm(cert.u_x))) <= 1e-10
        r = K - cert.i_x
        assert 0 <= r <= K - 1
        y = np.sort(np.abs(x))[::-1]
        tol = 1e-9 * max(1.0, float(y[0]))
        left = np.inf if cert.i_x == 1 else float(y[cert.i_x - 2])
        assert left >= cert.delta - tol
        assert cert.delta >= float(y[cert.i_x - 1]) - tol
    assert time.perf_counter() - t0 < 5.0


def test_03_majorization_formulations_equivalent():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)

    def perm_lp(u, cvec, emitter):
        m = ConicModel("perm", "min")
        xs = m.add_vars(u.size, "x")
        emitter(m, [float(v) for v in u], xs)
        m.set_objective("min", [(xs[i], float(cvec[i])) for i in range(u.size)])
        m.seal()
        rep = solve_lp(m)
        assert rep.status == "optimal"
        return rep.objective

    for n in range(3, 7):
        for _ in range(20):
            u = np.sort(rng.normal(0.0, 2.0, n))[::-1]
            cvec = rng.normal(size=n)
            v_dual = perm_lp(u, cvec, emit_majorization)
            v_net = perm_lp(u, cvec, emit_sorting_majorization)
            assert abs(v_dual - v_net) <= 1e-7

    def lp_member(u, x, emitter):
        m = ConicModel("member", "min")
        emitter(m, [float(v) for v in u], [float(v) for v in x])
        m.set_objective("min", {})
        m.seal()
        status = solve_lp(m).status
        assert status in ("optimal", "infeasible")
        return status == "optimal"

    for trial in range(200):
        n = int(rng.integers(3, 7))
        # the emitters take the descending representative of u
        u = np.sort(rng.normal(0.0, 1.5, n))[::-1]
        if trial % 2 == 0:
            ds = np.full((n, n), 1.0 / n)
            for _ in range(3):
                t = rng.uniform()
                ds = (1.0 - t) * ds + t * np.eye(n)[rng.permutation(n)]
            x = ds @ u
        else:
            x = u[rng.permutation(n)] + rng.normal(0.0, 0.05, n)
            x -= (x.sum() - u.sum()) / n
            if trial % 4 == 1:
                x[0] += 0.2
        truth = majorizes(u, x)
        assert lp_member(u, x, emit_majorization) == truth
        assert lp_member(u, x, emit_sorting_majorization) == truth
    assert time.perf_counter() - t0 < 30.0


def test_04_envelope_properties():
    t0 = time.perf_counter()
    for n, (a, b) in ((1, (-1.0, 2.0)), (2, (-1.0, 2.0)), (3, (-2.0, 1.0)),
                      (4, (-1.0, 2.0)), (5, (0.5, 2.0)), (6, (-1.0, 1.5))):
        box = Box(a, b, n)
        for bits in bit_patterns((0, 1), repeat=n):
            v = np.where(np.array(bits) == 1, b, a)
            want = float(np.prod(v))
            got = envelope.multilinear_envelope(v, box)
            assert abs(got - want) <= 1e-8 * max(1.0, abs(want))

    rng = np.random.default_rng(21)
    for box in (Box(-1.0, 2.0, 2), Box(-2.0, 1.0, 3),
                Box(-1.0, 1.0, 4), Box(0.5, 2.0, 5)):
        for _ in range(250):
            xp = rng.uniform(box.a, box.b, box.n)
            yp = rng.uniform(box.a, box.b, box.n)
            fx = envelope.multilinear_envelope(xp, box)
            fy = envelope.multilinear_envelope(yp, box)
            fm = envelope.multilinear_envelope(0.5 * (xp + yp), box)
            assert fm <= 0.5 * (fx + fy) + 1e-8

    for n in (2, 3, 4, 5):
        box = Box(-1.0, 1.0, n)
        for _ in range(50):
            xp = rng.uniform(-1.0, 1.0, n)
            ze = envelope.multilinear_envelope(xp, box)
            zr = envelope.mccormick_relax(xp, box)
            assert ze == pytest.approx(zr, abs=1e-8)

    box = Box(2.0, 4.0, 10)
    pts = np.random.default_rng(2).uniform(box.a, box.b, size=(9, 10))
    pcts = []
    for xp in pts:
        ze = envelope.multilinear_envelope(xp, box)
        zr = envelope.mccormick_relax(xp, box)
        assert ze >= zr - 1e-9 * max(1.0, abs(ze))
        pcts.append(100.0 * (ze - zr) / abs(ze))
    assert 30.0 < float(np.mean(pcts)) < 85.0

    box = Box(-2.0, 3.0, 10)
    pts = np.random.default_rng(0).uniform(box.a, box.b, size=(9, 10))
    gaps = []
    for xp in pts:
        ze = envelope.multilinear_envelope(xp, box)
        zr = envelope.mccormick_relax(xp, box)
        assert ze >= zr - 1e-9 * max(1.0, abs(ze))
        gaps.append(ze - zr)
    assert float(np.mean(gaps)) > 0.0
    assert time.perf_counter() - t0 < 60.0


def test_05_facet_and_birkhoff_reconstruction():
    rng = np.random.default_rng(31)
    box = Box(2.0, 4.0, 5)
    chain = envelope._chain_values(envelope.product, box)
    corners = [np.where(np.array(bits) == 1, box.b, box.a)
               for bits in bit_patterns((0, 1), repeat=5)]
    done = 0
    while done < 50:
        x = rng.uniform(box.a, box.b, 5)
        if float(np.min(np.diff(np.sort(x)))) <= 1e-6:
            continue
        done += 1
        cut = envelope.facet_from_point(x, box)
        value, ustar = envelope._envelope_lp(x, box, chain)
        assert cut.value(x) == pytest.approx(value, abs=1e-7)
        for v in corners:
            assert cut.value(v) <= float(np.prod(v)) + 1e-7
        s = transport_matrix(ustar, x)
        dec = birkhoff(s)
        assert len(dec.weights) <= 25
        assert np.max(np.abs(dec.matrix() - s)) <= 1e-12


def test_06_transport_closed_forms_and_certificates():
    rng = np.random.default_rng(41)

    def check(w, p, q, r, cert, closed):
        alpha, beta, gamma, delta = cert
        big = np.outer(w, w)
        tol = 1e-8
        assert float(np.min(alpha)) >= -tol
        assert float(np.min(beta)) >= -tol
        assert gamma >= -tol
        assert float(np.min(delta)) >= -tol
        lhs = alpha[:, None] + beta[None, :] + gamma + delta
        assert float(np.min(lhs - big)) >= -tol
        obj = q * alpha.sum() + p * beta.sum() + r * gamma + delta.sum()
        assert obj == pytest.approx(closed, abs=tol)

    for _ in range(200):
        n = int(rng.integers(2, 9))
        w = np.sort(rng.uniform(0.0, 3.0, n))[::-1]
        big = np.outer(w, w)
        for p in range(1, n + 1):
            for q in range(1, n + 1):
                closed = transport.h_closed_block(w, p, q)
                assert transport.h_primal(big, p, q, p * q) == pytest.approx(
                    closed, abs=1e-8)
                check(w, p, q, p * q,
                      transport.dual_certificate_block(w, p, q), closed)
        for r in range(1, n + 1):
            closed = transport.h_closed_diag(w, r)
            assert transport.h_primal(big, 1, 1, r) == pytest.approx(
                closed, abs=1e-8)
            check(w, 1, 1, r, transport.dual_certificate_diag(w, r), closed)


def test_07_pitprops_relaxation_table():
    t0 = time.perf_counter()
    z_star_table = {3: 2.4753, 4: 2.9375, 5: 3.4062, 6: 3.7710,
                    7: 3.9962, 8: 4.0686, 9: 4.1386, 10: 4.1726}
    z_d_table = {3: 2.5218, 4: 3.0172, 5: 3.4581, 6: 3.8137,
                 7: 4.0316, 8: 4.1448, 9: 4.2063, 10: 4.2186}
    diag_gap_table = {3: 57.86, 4: 62.83, 5: 97.96, 6: 100.00,
                      7: 100.00, 8: 95.48, 9: 100.00, 10: 91.32}
    t_gaps = []
    for K in range(3, 11):
        rep = spca.gap_report(spca.pitprops_instance(K), ("Diagonal", "T"),
                              tol=1e-6)
        assert rep.z_star == pytest.approx(z_star_table[K], abs=1e-3)
        assert rep.z_d == pytest.approx(z_d_table[K], abs=1e-2)
        assert rep.gap_closed["Diagonal"] == pytest.approx(
            diag_gap_table[K], abs=2.0)
        t_gaps.append(rep.gap_closed["T"])
    assert float(np.mean(t_gaps)) >= 98.0
    assert time.perf_counter() - t0 < 600.0


def test_08_relaxation_dominance_chains():
    link = 5e-3
    cases = ([(8, s) for s in range(8)] + [(10, s) for s in range(7)]
             + [(12, s) for s in range(100, 105)])
    assert len(cases) == 20
    for n, seed in cases:
        inst = spca.random_instance(n, seed)
        assert inst.K == max(2, round(n / 6.0))
        vals = {}
        for kind in spca.KINDS:
            rep = spca.solve_relaxation(inst, kind, tol=1e-6)
            assert rep.status == "optimal"
            vals[kind] = rep.objective
        z_star = spca.exact_spca(inst)[0]
        assert z_star <= vals["T"] + link
        assert vals["T"] <= vals["B"] + link
        assert vals["B"] <= vals["D"] + link
        tightest = min(vals["Diagonal"], vals["Rowsum"], vals["TwoStep"])
        assert vals["Submatrix"] <= tightest + link
        assert tightest <= vals["D"] + link
        for kind in spca.KINDS:
            model, point, value = spca.exact_lift(inst, kind)
            res = model.residuals(point)
            assert max(res.values()) <= 1e-8
            assert value == pytest.approx(z_star, abs=1e-12)


def test_09_formulation_size_scaling():
    counts = {}
    for n in (16, 32, 64):
        sizes = []
        for emitter in (emit_majorization, emit_sorting_majorization):
            m = ConicModel("count", "min")
            u = m.add_vars(n, "u")
            x = m.add_vars(n, "x")
            v0, r0 = m.nvars, len(m.rows)
            emitter(m, u, x)
            sizes.append((m.nvars - v0, len(m.rows) - r0))
        counts[n] = sizes
    for n in (16, 32, 64):
        (dual_v, dual_r), (net_v, net_r) = counts[n]
        quad = float(n * n)
        poly = float(n) * float(np.log2(n)) ** 2
        assert 0.3 <= dual_v / quad <= 3.0
        assert 0.3 <= dual_r / quad <= 3.0
        assert 0.1 <= net_v / poly <= 3.0
        assert 0.1 <= net_r / poly <= 3.0
    for small, bigger in ((16, 32), (32, 64)):
        (dv_s, dr_s), (nv_s, nr_s) = counts[small]
        (dv_b, dr_b), (nv_b, nr_b) = counts[bigger]
        assert nv_b / dv_b < nv_s / dv_s
        assert nr_b / dr_b < nr_s / dr_s


def test_10_file_format_golden_and_roundtrip():
    sigma = np.array([[4.0, 1.0, 0.0, 1.0],
                      [1.0, 3.0, 1.0, 0.0],
                      [0.0, 1.0, 2.0, 1.0],
                      [1.0, 0.0, 1.0, 2.0]])
    model = spca.build_relaxation(spca.SpcaInstance(sigma, 2), "D")
    text = export_sdpa(model)
    assert text.encode() == (GOLDEN / "d_relaxation_n4.dat-s").read_bytes()

    lp_bytes = (GOLDEN / "transport_321.lp").read_bytes()
    assert export_lp(parse_lp(lp_bytes.decode())).encode() == lp_bytes

    m = ConicModel("roundtrip", "max")
    xs = m.add_vars(3, "x")
    emit_majorization(m, [3.0, 2.0, 1.0], xs)
    m.set_objective("max", [(xs[0], 1.0), (xs[1], -0.5), (xs[2], 0.25)])
    m.seal()
    text1 = export_lp(m)
    again = parse_lp(text1)
    assert export_lp(again) == text1
    assert solve_lp(again).objective == pytest.approx(
        solve_lp(m).objective, abs=1e-12)
