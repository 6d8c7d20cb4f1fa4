import numpy as np
import pytest

from wcreg.cli import builtin_truth, main, read_csv_table
from wcreg.config import ExperimentConfig
from wcreg.grid import read_grid_csv, write_grid_csv
from wcreg import GridFunction, integrate


def run_cli(*args):
    return main(list(args))


def read_bytes_tree(root):
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


class TestBuiltinTruths:
    def test_catalog(self):
        assert np.allclose(builtin_truth("quadratic", 11).values, np.linspace(0, 1, 11))
        assert np.all(builtin_truth("constant", 11).values == 1.0)
        assert builtin_truth("abs-shift", 11).values[0] == pytest.approx(0.5)
        sine = builtin_truth("sine(2)", 101)
        assert sine.values[0] == pytest.approx(0.0, abs=1e-12)

    def test_unknown_rejected(self):
        with pytest.raises(Exception):
            builtin_truth("cubic", 11)


class TestDifferentiateCommand:
    def test_summary_values(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli("differentiate", "--truth", "quadratic", "--delta", "1e-4",
                       "--a", "2", "--m", "1", "--noise", "alternating-worst-case",
                       "--out", str(out))
        assert code == 0
        header, rows, _ = read_csv_table(out / "summary.csv")
        assert header == ["delta", "h", "eta"]
        delta, h, eta = rows[0]
        assert delta == 1e-4
        assert h == pytest.approx(0.01, rel=1e-12)
        assert eta == pytest.approx(0.02, rel=1e-12)
        recon = read_grid_csv(out / "reconstruction.csv")
        assert recon.n == 1001

    def test_external_input_file(self, tmp_path):
        g = integrate(GridFunction(np.linspace(0, 1, 201)))
        src = tmp_path / "g.csv"
        write_grid_csv(g, src)
        out = tmp_path / "out"
        code = run_cli("differentiate", "--input", str(src), "--delta", "1e-4",
                       "--a", "2", "--m", "1", "--out", str(out))
        assert code == 0

    def test_missing_input_exit_2(self, tmp_path):
        code = run_cli("differentiate", "--input", str(tmp_path / "nope.csv"),
                       "--delta", "1e-4", "--out", str(tmp_path / "o"))
        assert code == 2

    def test_a_not_above_one_exit_2(self, tmp_path, capsys):
        code = run_cli("differentiate", "--truth", "quadratic", "--delta", "1e-4",
                       "--a", "1", "--out", str(tmp_path / "o"))
        assert code == 2
        assert "a > 1" in capsys.readouterr().err


class TestSweepCommand:
    def test_eta_slope_exact(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli("sweep", "--deltas", "1e-2,1e-3,1e-4,1e-5", "--a", "2",
                       "--m", "1", "--noise", "alternating-worst-case",
                       "--count", "10", "--out", str(out))
        assert code == 0
        header, rows, meta = read_csv_table(out / "sweep.csv")
        assert header == ["delta", "h", "eta", "sup_err_est"]
        assert meta["eta_loglog_slope"] == pytest.approx(0.5, abs=1e-12)
        for delta, h, eta, est in rows:
            assert eta == pytest.approx(2 * np.sqrt(delta), rel=1e-12)
            assert est <= eta

    def test_single_delta_exit_2(self, tmp_path):
        assert run_cli("sweep", "--deltas", "1e-2", "--a", "2",
                       "--out", str(tmp_path / "o")) == 2


class TestAdversaryCommand:
    def test_sup_class_constant_separation(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli("adversary", "--class", "sup", "--m", "1",
                       "--deltas", "1e-2,1e-3", "--out", str(out))
        assert code == 0
        _, rows, _ = read_csv_table(out / "diameters.csv")
        for _, sep in rows:
            assert sep == pytest.approx(1.0, abs=0.02)

    def test_lip_class_sqrt_slope(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli("adversary", "--class", "lip", "--m", "2",
                       "--deltas", "1e-2,1e-3,1e-4,1e-5", "--out", str(out))
        assert code == 0
        _, rows, _ = read_csv_table(out / "diameters.csv")
        deltas = np.array([r[0] for r in rows])
        seps = np.array([r[1] for r in rows])
        slope = np.polyfit(np.log(deltas), np.log(seps), 1)[0]
        assert abs(slope - 0.5) <= 0.05

    def test_unknown_class_exit_2(self, tmp_path):
        assert run_cli("adversary", "--class", "huber", "--m", "1",
                       "--deltas", "1e-2", "--out", str(tmp_path / "o")) == 2


class TestVariationalCommand:
    def test_empty_deltas_empty_table(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli("variational", "--truth", "constant", "--deltas", "",
                       "--phi", "sup-norm", "--c", "2", "--out", str(out))
        assert code == 0
        header, rows, _ = read_csv_table(out / "convergence.csv")
        assert header[0] == "delta"
        assert rows == []

    def test_truth_outside_compactum_exit_3(self, tmp_path):
        code = run_cli("variational", "--truth", "constant", "--deltas", "1e-1",
                       "--phi", "sup-norm", "--c", "0.5", "--out", str(tmp_path / "o"))
        assert code == 3


class TestModulusCommand:
    def test_constants_pattern(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli("modulus", "--phi", "sup-norm", "--c", "1", "--levels", "21",
                       "--lattice-nodes", "5", "--constants-only", "true",
                       "--deltas", "0.05,0.15,0.35,2.5", "--out", str(out))
        assert code == 0
        _, rows, _ = read_csv_table(out / "modulus.csv")
        table = {round(d, 3): om for d, om in rows}
        assert table[0.05] == 0.0
        assert table[0.15] == pytest.approx(0.1, abs=1e-12)
        assert table[0.35] == pytest.approx(0.3, abs=1e-12)
        assert table[2.5] == pytest.approx(2.0, abs=1e-12)


class TestConfigHandling:
    def test_round_trip_identity(self, tmp_path):
        cfg = ExperimentConfig(command="sweep", out="results", seed=5,
                               deltas=(1e-2, 1e-3), a=1.5, m=2.0,
                               noise="alternating-worst-case", count=7)
        path = tmp_path / "exp.cfg"
        cfg.to_file(path)
        assert ExperimentConfig.from_file(path) == cfg

    def test_file_plus_flag_override(self, tmp_path):
        cfg_path = tmp_path / "d.cfg"
        cfg_path.write_text("# demo\ntruth = quadratic\ndelta = 1e-4\na = 2\nm = 1\n")
        out = tmp_path / "out"
        code = run_cli("differentiate", "--config", str(cfg_path),
                       "--delta", "1e-2", "--out", str(out))
        assert code == 0
        _, rows, _ = read_csv_table(out / "summary.csv")
        assert rows[0][0] == 1e-2  # flag wins over file

    def test_unknown_key_exit_2(self, tmp_path):
        cfg_path = tmp_path / "d.cfg"
        cfg_path.write_text("sigma = 3\n")
        assert run_cli("differentiate", "--config", str(cfg_path),
                       "--out", str(tmp_path / "o")) == 2


@pytest.mark.parametrize("args", [
    ("differentiate", "--truth", "quadratic", "--delta", "1e-4", "--a", "2", "--m", "1"),
    ("sweep", "--deltas", "1e-2,1e-3", "--a", "2", "--m", "1",
     "--noise", "alternating-worst-case", "--count", "8"),
    ("adversary", "--class", "lip", "--m", "2", "--deltas", "1e-2,1e-3"),
    ("variational", "--truth", "constant", "--deltas", "1e-1,1e-2",
     "--phi", "sup-norm", "--c", "2", "--count", "8"),
    ("modulus", "--phi", "sup-norm", "--c", "1", "--levels", "21",
     "--lattice-nodes", "5", "--constants-only", "true", "--deltas", "0.15,0.35"),
])
def test_rerun_is_byte_identical(tmp_path, args):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert run_cli(*args, "--seed", "9", "--out", str(out1)) == 0
    assert run_cli(*args, "--seed", "9", "--out", str(out2)) == 0
    assert read_bytes_tree(out1) == read_bytes_tree(out2)


def test_emitted_csvs_reparse(tmp_path):
    out = tmp_path / "out"
    assert run_cli("sweep", "--deltas", "1e-2,1e-3", "--a", "2", "--m", "1",
                   "--noise", "alternating-worst-case", "--count", "8",
                   "--seed", "1", "--out", str(out)) == 0
    header, rows, meta = read_csv_table(out / "sweep.csv")
    assert len(rows) == 2 and len(header) == 4 and "eta_loglog_slope" in meta
