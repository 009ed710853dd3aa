import numpy as np
import pytest

from treefield.cli import main
from treefield.io import (
    read_matrix_csv,
    read_points_csv,
    write_matrix_csv,
    write_points_csv,
)


def write_points(path, pts):
    write_points_csv(path, np.asarray(pts, dtype=float))
    return str(path)


@pytest.fixture
def two_points(tmp_path):
    return write_points(tmp_path / "pts.csv", [[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def river_points(tmp_path):
    return write_points(tmp_path / "river.csv", [[1.0, 2.0], [3.0, -1.0], [1.0, 5.0]])


class TestPointsCsv:
    def test_roundtrip(self, tmp_path):
        pts = np.array([[1.5, -2.0], [0.25, 7.0]])
        path = tmp_path / "p.csv"
        write_points_csv(path, pts)
        np.testing.assert_array_equal(read_points_csv(path), pts)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_points_csv(path)

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("x1,x2\n1,2\n3\n")
        with pytest.raises(ValueError):
            read_points_csv(path)

    def test_empty_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("")
        with pytest.raises(ValueError):
            read_points_csv(path)


class TestMatrixCsv:
    def test_roundtrip(self, tmp_path):
        entries = np.array([[0.0, 2.0], [2.0, 0.0]])
        path = tmp_path / "m.csv"
        write_matrix_csv(path, entries)
        np.testing.assert_array_equal(read_matrix_csv(path).entries, entries)

    def test_asymmetry_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("0,1\n2,0\n")
        with pytest.raises(ValueError):
            read_matrix_csv(path)

    def test_nonzero_diagonal_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,1\n1,0\n")
        with pytest.raises(ValueError):
            read_matrix_csv(path)


class TestMetricEval:
    def test_radial_two_points(self, tmp_path, two_points):
        out = tmp_path / "dm.csv"
        assert main(["metric", "eval", "--metric", "radial", "--points", two_points, "--out", str(out)]) == 0
        np.testing.assert_array_equal(read_matrix_csv(out).entries, [[0.0, 2.0], [2.0, 0.0]])

    def test_river_rejects_non_planar(self, tmp_path):
        pts = write_points(tmp_path / "p3.csv", [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert main(["metric", "eval", "--metric", "river", "--points", pts, "--out", str(tmp_path / "o.csv")]) == 2

    def test_empty_file_is_input_error(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert main(["metric", "eval", "--metric", "radial", "--points", str(empty)]) == 2

    def test_missing_metric_is_input_error(self, two_points):
        assert main(["metric", "eval", "--points", two_points]) == 2


class TestCheck:
    def test_radial_points_pass(self, tmp_path):
        rng = np.random.default_rng(1)
        pts = write_points(tmp_path / "p.csv", np.column_stack([rng.uniform(-5, 5, 8), rng.uniform(-5, 5, 8)]))
        assert main(["check", "--metric", "radial", "--points", pts]) == 0

    def test_euclidean_square_fails_with_witness_csv(self, tmp_path, capsys):
        pts = write_points(tmp_path / "sq.csv", [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        out = tmp_path / "report.csv"
        assert main(["check", "--metric", "euclidean", "--points", pts, "--out", str(out)]) == 1
        captured = capsys.readouterr().out
        assert "FAIL" in captured
        body = out.read_text()
        assert body.startswith("kind,indices,slack\n")
        assert "four-point" in body

    def test_check_matrix_input(self, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix_csv(path, np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert main(["check", "--matrix", str(path)]) == 0

    def test_size_cap_without_force(self, tmp_path):
        rng = np.random.default_rng(2)
        pts = write_points(tmp_path / "big.csv", rng.uniform(-5, 5, size=(65, 2)))
        assert main(["check", "--metric", "radial", "--points", pts]) == 2
        # The scan itself stays exhaustive when forced.
        assert main(["check", "--metric", "radial", "--points", pts, "--force"]) == 0


class TestCdsetGrid:
    def run_grid(self, tmp_path, metric, p1, p2, by_definition=False, grid="-5,5,-5,5,21,21"):
        out = tmp_path / ("def.csv" if by_definition else "region.csv")
        argv = [
            "cdset",
            "grid",
            p1,
            p2,
            "--metric",
            metric,
            f"--grid={grid}",
            "--out",
            str(out),
        ]
        if by_definition:
            argv.append("--by-definition")
        assert main(argv) == 0
        return out.read_text()

    @pytest.mark.parametrize(
        "metric,p1,p2",
        [
            ("radial", "2,0", "1,0"),
            ("radial", "1,0", "0,1"),
            ("river", "1,2", "1,1"),
            ("river", "1,2", "3,0"),
        ],
    )
    def test_masks_agree_between_routes(self, tmp_path, metric, p1, p2):
        region_text = self.run_grid(tmp_path, metric, p1, p2)
        def_text = self.run_grid(tmp_path, metric, p1, p2, by_definition=True)
        assert region_text == def_text

    def test_complement_mask_shape(self, tmp_path):
        text = self.run_grid(tmp_path, "radial", "2,0", "1,0", grid="-2,4,-1,1,4,3")
        lines = text.strip().splitlines()
        assert lines[0] == "x,y,member"
        rows = dict()
        for line in lines[1:]:
            x, y, member = line.split(",")
            rows[(float(x), float(y))] = member
        # Nodes on the carrying ray sit on the region boundary itself.
        assert rows[(4.0, 0.0)] == "S"
        assert rows[(2.0, 0.0)] == "S"
        assert rows[(-2.0, 0.0)] == "1"  # opposite ray stays inside
        assert rows[(2.0, 1.0)] == "1"  # off the carrying ray entirely
        assert rows[(0.0, 0.0)] == "1"  # origin is inside, one unit from the cutoff

    def test_bad_pair_is_input_error(self, tmp_path):
        out = tmp_path / "g.csv"
        assert main(["cdset", "grid", "1,2,3", "0,1", "--metric", "river", "--out", str(out)]) == 2
        assert main(["cdset", "grid", "nope", "0,1", "--metric", "radial", "--out", str(out)]) == 2


class TestSimulate:
    def test_radial_shape_and_determinism(self, tmp_path, two_points):
        out1 = tmp_path / "s1.csv"
        out2 = tmp_path / "s2.csv"
        base = ["simulate", "--metric", "radial", "--points", two_points, "--seed", "7", "--reps", "3"]
        assert main(base + ["--out", str(out1)]) == 0
        assert main(base + ["--out", str(out2)]) == 0
        text = out1.read_text()
        assert text == out2.read_text()
        assert len(text.strip().splitlines()) == 1 + 6  # header + reps * points

    def test_river_labelled_closure_echo(self, tmp_path):
        pts = write_points(tmp_path / "one.csv", [[2.0, 3.0]])
        labelled_out = tmp_path / "labelled.csv"
        out = tmp_path / "samples.csv"
        assert (
            main(
                [
                    "simulate",
                    "--metric",
                    "river",
                    "--points",
                    pts,
                    "--seed",
                    "1",
                    "--reps",
                    "2",
                    "--out",
                    str(out),
                    "--labelled-out",
                    str(labelled_out),
                ]
            )
            == 0
        )
        labelled = read_points_csv(labelled_out)
        np.testing.assert_array_equal(labelled, [[0.0, 0.0], [2.0, 0.0], [2.0, 3.0]])
        assert len(out.read_text().strip().splitlines()) == 1 + 2 * 3

    def test_different_seeds_differ(self, tmp_path, two_points):
        out1 = tmp_path / "s1.csv"
        out2 = tmp_path / "s2.csv"
        main(["simulate", "--metric", "radial", "--points", two_points, "--seed", "1", "--reps", "5", "--out", str(out1)])
        main(["simulate", "--metric", "radial", "--points", two_points, "--seed", "2", "--reps", "5", "--out", str(out2)])
        assert out1.read_text() != out2.read_text()


class TestVerify:
    def test_radial_suite_passes(self, tmp_path, capsys):
        rng = np.random.default_rng(9)
        pts = write_points(tmp_path / "p.csv", np.column_stack([rng.uniform(-4, 4, 6), rng.uniform(-4, 4, 6)]))
        assert main(["verify", "--metric", "radial", "--points", pts, "--seed", "3", "--reps", "4000"]) == 0
        out = capsys.readouterr().out
        assert "induced-covariance: PASS" in out
        assert "mc-covariance: PASS" in out

    def test_river_suite_passes(self, tmp_path, river_points):
        assert main(["verify", "--metric", "river", "--points", river_points, "--seed", "3", "--reps", "4000"]) == 0

    def test_single_rep_skips_mc(self, tmp_path, river_points, capsys):
        assert main(["verify", "--metric", "river", "--points", river_points, "--seed", "3", "--reps", "1"]) == 0
        assert "mc-covariance: SKIPPED" in capsys.readouterr().out


class TestIdentify:
    def test_radial_battery_consistent(self, capsys):
        assert main(["identify", "--metric", "radial"]) == 0
        out = capsys.readouterr().out
        assert "power p=1: mismatches=0" in out
        assert "matches base metric" in out
        assert "power p=1.5" in out

    def test_river_battery_consistent(self):
        assert main(["identify", "--metric", "river"]) == 0


class TestConfigResolution:
    def test_env_overrides_default_seed(self, tmp_path, two_points, monkeypatch):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        monkeypatch.setenv("TREEFIELD_SEED", "7")
        main(["simulate", "--metric", "radial", "--points", two_points, "--reps", "3", "--out", str(out1)])
        monkeypatch.delenv("TREEFIELD_SEED")
        main(["simulate", "--metric", "radial", "--points", two_points, "--seed", "7", "--reps", "3", "--out", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_flags_beat_env(self, tmp_path, two_points, monkeypatch):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        monkeypatch.setenv("TREEFIELD_SEED", "3")
        main(["simulate", "--metric", "radial", "--points", two_points, "--seed", "7", "--reps", "3", "--out", str(out1)])
        monkeypatch.delenv("TREEFIELD_SEED")
        main(["simulate", "--metric", "radial", "--points", two_points, "--seed", "7", "--reps", "3", "--out", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_config_file_supplies_settings(self, tmp_path, two_points):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("metric = radial\nseed = 7\nreps = 3\n")
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(["simulate", "--points", two_points, "--config", str(cfg), "--out", str(out1)]) == 0
        main(["simulate", "--metric", "radial", "--points", two_points, "--seed", "7", "--reps", "3", "--out", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_flags_beat_config_file(self, tmp_path, two_points):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("metric = radial\nseed = 3\nreps = 3\n")
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        main(["simulate", "--points", two_points, "--config", str(cfg), "--seed", "7", "--out", str(out1)])
        main(["simulate", "--metric", "radial", "--points", two_points, "--seed", "7", "--reps", "3", "--out", str(out2)])
        assert out1.read_text() == out2.read_text()

    def test_unknown_command_is_error(self):
        assert main(["frobnicate"]) == 2
