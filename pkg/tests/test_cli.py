import json

import numpy as np
import pytest

from trapstab import io
from trapstab.cli import _join_values, main, parse_range
from trapstab.floquet import trace_eigenvalues
from trapstab.hill import hill_boundary
from trapstab.multiscale import coupled_boundaries, decoupled_boundaries
from trapstab.sweep import GridSpec, sweep_grid


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def lines(path):
    return path.read_text().splitlines()


class TestRangeParsing:
    def test_parse(self):
        assert parse_range("-1:1.5") == (-1.0, 1.5)
        assert parse_range("1e-3:2E0") == (1e-3, 2.0)

    @pytest.mark.parametrize("text", ["1", "a:b", "2:1", "1:1"])
    def test_rejects(self, text):
        with pytest.raises(Exception):
            parse_range(text)

    def test_negative_values_joined(self):
        assert _join_values(["--a", "-1:1.5", "--nq", "3"]) == ["--a=-1:1.5", "--nq", "3"]


class TestIO:
    def test_grid_round_trip(self, tmp_path):
        g = sweep_grid(0.5, 12.0, GridSpec(0, 2, -1, 1.5, 7, 5))
        io.write_grid_csv(tmp_path / "g.csv", g)
        q, a, codes, counts = io.read_grid_csv(tmp_path / "g.csv")
        np.testing.assert_array_equal(codes, g.codes)
        np.testing.assert_array_equal(counts, g.unit_counts)
        np.testing.assert_array_equal(q[:, 0], g.spec.q_centers())
        np.testing.assert_array_equal(a[0], g.spec.a_centers())

    def test_pgm_orientation(self, tmp_path):
        g = sweep_grid(0.5, 0.0, GridSpec(0, 2, -1, 1.5, 3, 4))
        io.write_grid_pgm(tmp_path / "g.pgm", g)
        img = io.read_pgm(tmp_path / "g.pgm")
        assert img.shape == (4, 3)
        levels = {0: 0, 1: 128, 2: 192, 3: 255}
        for i in range(3):
            for j in range(4):
                assert img[3 - j, i] == levels[int(g.codes[i, j])]

    def test_curves_round_trip(self, tmp_path):
        qs = np.linspace(0, 1, 7) / 3
        curves = coupled_boundaries(0.5, 17.0, qs) + decoupled_boundaries(0.5, qs)
        io.write_curves_csv(tmp_path / "c.csv", curves)
        back = io.read_curves_csv(tmp_path / "c.csv")
        assert [(c.label, c.method) for c in back] == [(c.label, c.method) for c in curves]
        for c, b in zip(curves, back):
            assert c.points == b.points

    def test_hill_curves_round_trip(self, tmp_path):
        curves = hill_boundary(1, 0.5, 12.0, np.linspace(0.01, 0.3, 5), a_bracket=(0.0, 2.0))
        io.write_curves_csv(tmp_path / "h.csv", curves)
        assert [c.points for c in io.read_curves_csv(tmp_path / "h.csv")] == [c.points for c in curves]

    def test_trace_tables(self, tmp_path):
        tr = trace_eigenvalues(0.5, 0.0, 0.5, (-0.5, 1.5), 30)
        io.write_trace_csv(tmp_path / "t.csv", tr)
        io.write_collisions_csv(tmp_path / "c.csv", tr)
        rows = io.read_table(tmp_path / "t.csv")
        assert len(rows) == 30
        assert float(rows[3]["re2"]) == tr.path[3][1].values[1].real
        col = io.read_table(tmp_path / "c.csv")
        assert [float(r["a"]) for r in col] == [c.a for c in tr.collisions]

    def test_manifest_round_trip(self, tmp_path):
        io.write_manifest(tmp_path / "m", {"a": "x=y", "b": [1, 2], "c": 0.5})
        m = io.read_manifest(tmp_path / "m")
        assert m == {"a": "x=y", "b": "[1, 2]", "c": "0.5"}


class TestCommands:
    def test_minimal_sweep(self, tmp_path):
        assert run(tmp_path, "sweep", "--alpha", "0.5", "--q", "0:2", "--a", "-1:1.5", "--nq", "2", "--na", "2") == 0
        csv = lines(tmp_path / "sweep.csv")
        assert csv[0] == "q,a,class,unit_count" and len(csv) == 5
        assert io.read_pgm(tmp_path / "sweep.pgm").shape == (2, 2)
        raw = (tmp_path / "sweep.csv").read_bytes()
        assert b"\r" not in raw

    def test_manifest_contents(self, tmp_path):
        run(tmp_path, "sweep", "--alpha", "0.5", "--theta", "30", "--nq", "2", "--na", "3", "--prefix", "x")
        m = io.read_manifest(tmp_path / "x.manifest")
        assert m["command"] == "sweep"
        assert json.loads(m["param.theta"]) == 30.0
        assert json.loads(m["info.steps_per_period"]) == 2048
        assert m["info.method"] == "RK4"
        assert "version" in m and "wall_time_s" in m
        assert m["outputs"].split(",") == [str(tmp_path / "x.csv"), str(tmp_path / "x.pgm")]

    def test_boundaries(self, tmp_path):
        assert run(tmp_path, "boundaries", "--alpha", "0.5", "--theta", "45", "--nq", "5") == 0
        rows = io.read_table(tmp_path / "boundaries.csv")
        assert {r["label"] for r in rows} == {"a0_lower", "a0_upper", "a1_coupled", "a_neg_coupled"}
        assert run(tmp_path, "boundaries", "--alpha", "0.5", "--decoupled", "--nq", "5") == 0
        assert len({r["label"] for r in io.read_table(tmp_path / "boundaries.csv")}) == 8

    def test_hill_truncation_exit_code(self, tmp_path, capsys):
        code = run(tmp_path, "hill", "--alpha", "0.5", "--nu", "1", "--q", "0:0.6", "--nq", "13")
        assert code == 2
        assert "left the bracket" in capsys.readouterr().err
        assert "left the bracket" in (tmp_path / "hill.manifest").read_text()

    def test_hill_clean(self, tmp_path):
        code = run(tmp_path, "hill", "--alpha", "0.5", "--nu", "0", "--bracket", "-0.5:0.5",
                   "--q", "0.01:0.2", "--nq", "5", "--order", "15")
        assert code == 0
        assert {r["method"] for r in io.read_table(tmp_path / "hill.csv")} == {"Hill"}

    def test_trace(self, tmp_path):
        assert run(tmp_path, "trace", "--alpha", "0.5", "--q", "0.5", "--a", "-0.5:1.5", "--steps", "60") == 0
        assert lines(tmp_path / "trace.csv")[0] == "a,re1,im1,re2,im2,re3,im3,re4,im4,unit_count"
        assert lines(tmp_path / "trace_collisions.csv")[0] == "a,loc_re,loc_im,on_real_axis"

    def test_cell_errors_exit_code(self, tmp_path):
        code = run(tmp_path, "sweep", "--alpha", "0.5", "--a", "-1e12:1", "--nq", "2", "--na", "2",
                   "--steps-per-period", "16")
        assert code == 2
        assert io.read_manifest(tmp_path / "sweep.manifest")["info.cell_errors"] == "2"

    def test_fatal_parameter_error(self, tmp_path, capsys):
        assert run(tmp_path, "sweep", "--alpha", "-1", "--nq", "2", "--na", "2") == 1
        assert "alpha" in capsys.readouterr().err

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["boundaries", "--alpha", "0.5", "--out", str(blocker / "sub")]) == 1

    def test_thread_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TRAPSTAB_THREADS", "1")
        run(tmp_path, "boundaries", "--alpha", "0.5", "--nq", "3")
        assert io.read_manifest(tmp_path / "boundaries.manifest")["threads"] == "1"


class TestReproducibility:
    ARGV = ["sweep", "--alpha", "0.5", "--theta", "6.4", "--q", "0:2", "--a", "-1:1.5",
            "--nq", "9", "--na", "11"]

    def test_identical_invocations(self, tmp_path):
        main(self.ARGV + ["--out", str(tmp_path / "r1")])
        main(self.ARGV + ["--out", str(tmp_path / "r2")])
        for name in ("sweep.csv", "sweep.pgm"):
            assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()

    def test_replay(self, tmp_path):
        main(self.ARGV + ["--out", str(tmp_path / "orig")])
        assert main(["replay", str(tmp_path / "orig" / "sweep.manifest"), "--out", str(tmp_path / "again")]) == 0
        for name in ("sweep.csv", "sweep.pgm"):
            assert (tmp_path / "orig" / name).read_bytes() == (tmp_path / "again" / name).read_bytes()
