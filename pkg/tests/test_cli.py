import json
import os

import numpy as np
import pytest

from permhull import cli, majorization, solvers, spca

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

EX_X = [27.0 / 28, 5.0 / 28, 4.0 / 28, 3.0 / 28, 2.0 / 28, 1.0 / 28]

D_SIGMA = [[4.0, 1.0, 0.0, 1.0],
           [1.0, 3.0, 1.0, 0.0],
           [0.0, 1.0, 2.0, 1.0],
           [1.0, 0.0, 1.0, 2.0]]


def write_json(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run_json(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    assert code == 0
    return json.loads(out)


def run_csv(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr().out
    assert code == 0
    return [line.split(",") for line in out.strip().splitlines()]


class TestKnorm:
    def test_exterior_point_with_cut(self, tmp_path, capsys):
        vec = write_json(tmp_path, "x.json", EX_X)
        out = run_json(capsys, ["knorm", "--input", vec, "--k", "3"])
        assert out["schema"] == "knorm/1"
        assert out["cNorm"] == pytest.approx(1.0360, abs=5e-4)
        assert out["membership"] == "outside"
        plane = out["hyperplane"]
        assert plane["rhs"] == 1.0
        assert len(plane["coefficients"]) == 6
        value = float(np.dot(plane["coefficients"], EX_X))
        assert value == pytest.approx(out["cNorm"], abs=1e-9)

    def test_interior_point_has_no_cut(self, tmp_path, capsys):
        vec = write_json(tmp_path, "x.json", {"values": [0.3, 0.0, 0.0, 0.0]})
        out = run_json(capsys, ["knorm", "--input", vec, "--k", "2"])
        assert out["membership"] == "inside"
        assert "hyperplane" not in out

    def test_max_norm_variant(self, tmp_path, capsys):
        vec = write_json(tmp_path, "x.json", [1.0, 1.0, 1.0])
        out = run_json(capsys, ["knorm", "--input", vec, "--k", "2",
                                "--norm", "linf"])
        assert out["membership"] == "outside"

    def test_bad_json_is_input_error(self, tmp_path, capsys):
        path = tmp_path / "x.json"
        path.write_text("[1, 2,")
        code = cli.main(["knorm", "--input", str(path), "--k", "2"])
        captured = capsys.readouterr()
        assert code == 2
        assert captured.out == ""
        assert "error:" in captured.err

    def test_missing_file_is_input_error(self, tmp_path, capsys):
        code = cli.main(["knorm", "--input", str(tmp_path / "no.json"),
                         "--k", "2"])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestEnvelope:
    def test_symmetric_box_matches_mccormick(self, tmp_path, capsys):
        vec = write_json(tmp_path, "p.json", [0.5, 0.5, 0.5])
        out = run_json(capsys, ["envelope", "--box=-1,1,3",
                                "--point", vec, "--compare-mccormick"])
        assert out["schema"] == "envelope/1"
        assert out["gap"] == pytest.approx(0.0, abs=1e-8)
        assert out["percentGap"] == pytest.approx(0.0, abs=1e-6)
        assert out["box"] == {"a": -1.0, "b": 1.0, "n": 3}

    def test_without_comparison(self, tmp_path, capsys):
        vec = write_json(tmp_path, "p.json", [3.0, 3.0, 3.0])
        out = run_json(capsys, ["envelope", "--box", "2,5,3", "--point", vec])
        assert out["envelope"] == pytest.approx(20.0, abs=1e-8)
        assert "mccormick" not in out

    def test_malformed_box(self, tmp_path, capsys):
        vec = write_json(tmp_path, "p.json", [0.5, 0.5])
        code = cli.main(["envelope", "--box", "0,1", "--point", vec])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_point_outside_box(self, tmp_path, capsys):
        vec = write_json(tmp_path, "p.json", [9.0, 0.5])
        code = cli.main(["envelope", "--box", "0,1,2", "--point", vec])
        assert code == 2
        capsys.readouterr()


class TestEnvelopeTable:
    def test_shape_and_sign(self, capsys):
        rows = run_csv(capsys, ["envelope-table", "--box", "2,4,10",
                                "--samples", "3", "--seed", "1"])
        assert rows[0] == ["Sample", "z_e", "z_r", "Gap", "%Gap"]
        assert len(rows) == 5
        assert rows[-1][0] == "Average"
        for row in rows[1:]:
            assert float(row[1]) >= float(row[2]) - 1e-4
            assert float(row[3]) >= -1e-4

    def test_deterministic_per_seed(self, capsys):
        argv = ["envelope-table", "--box=-2,3,4", "--samples", "4",
                "--seed", "7"]
        assert cli.main(argv) == 0
        first = capsys.readouterr().out
        assert cli.main(argv) == 0
        second = capsys.readouterr().out
        assert first == second
        assert cli.main(argv[:-1] + ["8"]) == 0
        assert capsys.readouterr().out != first


class TestSpcaCommand:
    def test_exact_on_pitprops(self, capsys):
        out = run_json(capsys, ["spca", "exact", "--matrix", "pitprops",
                                "--k", "3"])
        assert out["schema"] == "spca-exact/1"
        assert out["value"] == pytest.approx(2.4753, abs=1e-3)
        assert len(out["support"]) == 3
        assert len(out["x"]) == 13

    def test_exact_on_random_spec(self, capsys):
        out = run_json(capsys, ["spca", "exact", "--matrix", "random:8,1"])
        assert out["schema"] == "spca-exact/1"
        assert len(out["support"]) == 2

    def test_exact_on_instance_file(self, tmp_path, capsys):
        inst = spca.random_instance(6, 5)
        path = write_json(tmp_path, "inst.json", inst.to_dict())
        out = run_json(capsys, ["spca", "exact", "--matrix", path])
        value, _, _ = spca.exact_spca(inst)
        assert out["value"] == pytest.approx(value, abs=1e-12)

    def test_solve_single_kind(self, capsys):
        out = run_json(capsys, ["spca", "solve", "--matrix", "pitprops",
                                "--k", "3", "--kind", "d"])
        assert out["schema"] == "spca-solve/1"
        assert out["kind"] == "D"
        assert out["report"]["objective"] == pytest.approx(2.5218, abs=1e-2)
        assert out["report"]["status"] == "optimal"

    def test_solve_requires_one_kind(self, capsys):
        code = cli.main(["spca", "solve", "--matrix", "pitprops", "--k", "3",
                         "--kind", "d", "--kind", "b"])
        assert code == 2
        capsys.readouterr()

    def test_gap_table_diagonal(self, capsys):
        rows = run_csv(capsys, ["spca", "gaps", "--matrix", "pitprops",
                                "--k", "3", "--kind", "diag"])
        assert rows[0] == ["K", "kind", "zStar", "zD", "zRelax",
                           "gapClosedPercent", "seconds"]
        assert len(rows) == 2
        k, kind, z_star, z_d, z_relax, gap, seconds = rows[1]
        assert k == "3" and kind == "Diagonal"
        assert float(z_star) == pytest.approx(2.4753, abs=1e-3)
        assert float(z_d) == pytest.approx(2.5218, abs=1e-2)
        assert float(gap) == pytest.approx(57.86, abs=2.0)
        assert float(seconds) >= 0.0

    def test_pitprops_needs_budget(self, capsys):
        code = cli.main(["spca", "exact", "--matrix", "pitprops"])
        assert code == 2
        capsys.readouterr()

    def test_solver_failure_exit_code(self, monkeypatch, capsys):
        def explode(*args, **kwargs):
            raise solvers.SolverError("stub breakdown")

        monkeypatch.setattr(spca, "solve_relaxation", explode)
        code = cli.main(["spca", "solve", "--matrix", "pitprops", "--k", "3",
                         "--kind", "d"])
        captured = capsys.readouterr()
        assert code == 3
        assert captured.out == ""
        assert "solver failure" in captured.err


class TestExport:
    def test_transport_lp_matches_golden(self, tmp_path, capsys):
        w = np.array([3.0, 2.0, 1.0])
        weights = write_json(tmp_path, "w.json",
                             [[float(v) for v in row]
                              for row in np.outer(w, w)])
        out = str(tmp_path / "model.lp")
        code = cli.main(["export", "--model", "transport",
                         "--weights", weights, "--p", "2", "--q", "1",
                         "--r", "2", "--format", "lp", "--out", out])
        captured = capsys.readouterr()
        assert code == 0
        assert captured.out == ""
        assert "wrote" in captured.err
        with open(out) as fh:
            written = fh.read()
        with open(os.path.join(GOLDEN, "transport_321.lp")) as fh:
            assert written == fh.read()

    def test_spca_sdpa_matches_golden(self, tmp_path, capsys):
        inst = write_json(tmp_path, "inst.json",
                          {"n": 4, "K": 2,
                           "sigma": [v for row in D_SIGMA for v in row]})
        out = str(tmp_path / "model.dat-s")
        code = cli.main(["export", "--model", "spca:D", "--matrix", inst,
                         "--format", "sdpa", "--out", out])
        capsys.readouterr()
        assert code == 0
        with open(out) as fh:
            written = fh.read()
        with open(os.path.join(GOLDEN, "d_relaxation_n4.dat-s")) as fh:
            assert written == fh.read()

    def test_conic_model_rejects_lp_format(self, tmp_path, capsys):
        inst = write_json(tmp_path, "inst.json",
                          {"n": 4, "K": 2,
                           "sigma": [v for row in D_SIGMA for v in row]})
        code = cli.main(["export", "--model", "spca:D", "--matrix", inst,
                         "--format", "lp", "--out", str(tmp_path / "m.lp")])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_unknown_model_spec(self, tmp_path, capsys):
        code = cli.main(["export", "--model", "mystery", "--format", "lp",
                         "--out", str(tmp_path / "m.lp")])
        assert code == 2
        capsys.readouterr()

    def test_transport_requires_weights(self, tmp_path, capsys):
        code = cli.main(["export", "--model", "transport", "--format", "lp",
                         "--out", str(tmp_path / "m.lp")])
        assert code == 2
        capsys.readouterr()


class TestBirkhoff:
    def test_decomposes_doubly_stochastic(self, tmp_path, capsys):
        mat = [[0.5, 0.5, 0.0], [0.25, 0.25, 0.5], [0.25, 0.25, 0.5]]
        path = write_json(tmp_path, "ds.json", mat)
        out = run_json(capsys, ["birkhoff", "--matrix", path])
        assert out["schema"] == "birkhoff/1"
        assert out["n"] == 3
        assert sum(out["weights"]) == pytest.approx(1.0, abs=1e-12)
        rebuilt = np.zeros((3, 3))
        for w, perm in zip(out["weights"], out["permutations"]):
            p = np.zeros((3, 3))
            p[np.arange(3), perm] = 1.0
            rebuilt += w * p
        assert np.abs(rebuilt - np.array(mat)).max() <= 1e-12

    def test_rejects_non_stochastic(self, tmp_path, capsys):
        path = write_json(tmp_path, "m.json", [[0.9, 0.0], [0.0, 0.9]])
        code = cli.main(["birkhoff", "--matrix", path])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestParser:
    def test_console_entry_configured(self):
        import importlib.metadata as im
        eps = im.entry_points()
        if hasattr(eps, "select"):
            eps = eps.select(group="console_scripts")
        else:
            eps = eps.get("console_scripts", [])
        names = {ep.name: ep.value for ep in eps}
        assert names.get("permhull") == "permhull.cli:main"
