import json
import math
import subprocess
import sys

import numpy as np
import pytest

import quadherald as qh
from quadherald.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    lines = text.strip().splitlines()
    meta = {}
    k = 0
    while lines[k].startswith("#"):
        key, _, value = lines[k][2:].partition(": ")
        meta[key] = json.loads(value)
        k += 1
    columns = lines[k].split(",")
    rows = [dict(zip(columns, line.split(","))) for line in lines[k + 1:]]
    return meta, columns, rows


class TestStats:
    def test_matches_library(self, capsys):
        code, out, _ = run(capsys, "stats", "--lambda", "0.25", "--x0", "2")
        assert code == 0
        record = json.loads(out)
        s, w = qh.Squeezing(0.25), qh.AcceptanceWindow.threshold(2.0)
        assert record["mandel_q"] == qh.mandel_q(s, w)
        assert record["acceptance_probability"] == qh.acceptance_probability(s, w)
        assert record["mean_n"] == qh.mean_photon_number(s, w)
        assert record["mandel_q"] == pytest.approx(-0.216, abs=1e-3)

    def test_thermal_distribution(self, capsys):
        code, out, _ = run(capsys, "stats", "--lambda", "0.25", "--x0", "0",
                           "--pn")
        assert code == 0
        p = np.array(json.loads(out)["p"])
        expected = 0.75 * 0.25 ** np.arange(len(p))
        assert np.max(np.abs(p - expected)) <= 1e-15

    def test_passthrough_with_detector(self, capsys):
        code, out, _ = run(capsys, "stats", "--lambda", "0.3", "--x0", "1.5",
                           "--eta", "0.8")
        assert code == 0
        record = json.loads(out)
        s, w, d = qh.Squeezing(0.3), qh.AcceptanceWindow.threshold(1.5), \
            qh.DetectorModel(eta=0.8)
        assert record["acceptance_probability"] == \
            qh.acceptance_probability_imperfect(s, w, d)
        assert record["mean_n"] == qh.mean_photon_number(s, w, d)
        assert record["second_factorial"] == qh.second_factorial_moment(s, w, d)
        assert record["mandel_q"] == qh.mandel_q(s, w, d)

    def test_byte_identical_files(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            assert main(["stats", "--lambda", "0.4", "--x0", "1",
                         "--eta", "0.9", "--out", str(path)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_csv_format(self, capsys):
        code, out, _ = run(capsys, "stats", "--lambda", "0.25", "--x0", "2",
                           "--format", "csv")
        assert code == 0
        _, columns, rows = parse_csv(out)
        assert "mandel_q" in columns and len(rows) == 1
        assert float(rows[0]["mandel_q"]) == qh.mandel_q(
            qh.Squeezing(0.25), qh.AcceptanceWindow.threshold(2.0))

    def test_undefined_q_exits_2(self, capsys):
        code, _, err = run(capsys, "stats", "--lambda", "0", "--x0", "1")
        assert code == 2 and "undefined" in err

    def test_nonconvergence_exits_3(self, capsys):
        code, _, err = run(capsys, "stats", "--lambda", "0.9995", "--x0", "1")
        assert code == 3 and "cap" in err

    def test_bad_usage_exits_2(self, capsys):
        assert run(capsys, "stats", "--x0", "1")[0] == 2
        assert run(capsys, "stats", "--lambda", "1.5", "--x0", "1")[0] == 2
        assert run(capsys, "nonsense")[0] == 2


class TestSweep:
    def test_single_point_equals_stats(self, capsys):
        code, out, _ = run(capsys, "sweep", "--lambda", "0.25", "--x0", "2")
        assert code == 0
        _, _, rows = parse_csv(out)
        assert len(rows) == 1
        s, w = qh.Squeezing(0.25), qh.AcceptanceWindow.threshold(2.0)
        assert float(rows[0]["C"]) == qh.acceptance_probability(s, w)
        assert float(rows[0]["Q"]) == qh.mandel_q(s, w)
        assert float(rows[0]["mean"]) == qh.mean_photon_number(s, w)

    def test_monotone_columns(self, capsys):
        code, out, _ = run(capsys, "sweep", "--lambda", "0.05",
                           "--x0", "0:4:41", "--quantities", "mean,Q")
        assert code == 0
        _, _, rows = parse_csv(out)
        means = [float(r["mean"]) for r in rows]
        qs = [float(r["Q"]) for r in rows]
        assert np.all(np.diff(means) > 0) and np.all(np.diff(qs) < 0)

    def test_heterodyne_column(self, capsys):
        code, out, _ = run(capsys, "sweep", "--lambda", "0.001:0.9:100",
                           "--x0", "1.5", "--eta", "0.5", "--quantities", "C")
        assert code == 0
        _, _, rows = parse_csv(out)
        assert len(rows) == 100
        for row in rows:
            lam = float(row["lam"])
            assert float(row["C"]) == pytest.approx(
                1.0 - math.erf(1.5 * math.sqrt(1.0 - lam)), abs=1e-12)

    def test_undefined_rows_report_error_column(self, capsys):
        code, out, _ = run(capsys, "sweep", "--lambda", "0,0.2", "--x0", "1",
                           "--quantities", "Q")
        assert code == 0
        _, _, rows = parse_csv(out)
        assert rows[0]["Q"] == "" and "undefined" in rows[0]["error"]
        assert rows[1]["Q"] != "" and rows[1]["error"] == ""

    def test_row_order_is_lexicographic(self, capsys):
        code, out, _ = run(capsys, "sweep", "--lambda", "0.1,0.2",
                           "--x0", "0,1", "--quantities", "C")
        _, _, rows = parse_csv(out)
        key = [(float(r["lam"]), float(r["x0"])) for r in rows]
        assert key == [(0.1, 0.0), (0.1, 1.0), (0.2, 0.0), (0.2, 1.0)]

    def test_spec_file(self, tmp_path, capsys):
        spec = {"lam": [0.25], "x0": [2.0], "quantities": ["C", "p_n"],
                "pn_max": 4}
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec))
        code, out, _ = run(capsys, "sweep", "--spec", str(path))
        assert code == 0
        _, columns, rows = parse_csv(out)
        assert "p_4" in columns
        stats = qh.photon_distribution(qh.Squeezing(0.25),
                                       qh.AcceptanceWindow.threshold(2.0))
        assert float(rows[0]["p_3"]) == float(stats.p[3])

    def test_quantities_with_radii(self, capsys):
        code, out, _ = run(capsys, "sweep", "--lambda", "0.25", "--x0", "2",
                           "--quantities", "husimi,wigner", "--radii", "0,1,2")
        assert code == 0
        _, columns, rows = parse_csv(out)
        assert {"husimi_r0", "husimi_r2", "wigner_r1"} <= set(columns)
        stats = qh.photon_distribution(qh.Squeezing(0.25),
                                       qh.AcceptanceWindow.threshold(2.0))
        assert float(rows[0]["wigner_r1"]) == qh.wigner(stats.p, 1.0)

    def test_csv_numbers_roundtrip(self, capsys):
        _, out, _ = run(capsys, "sweep", "--lambda", "0.1,0.37", "--x0",
                        "0.7,2.3")
        _, columns, rows = parse_csv(out)
        for row in rows:
            for col in columns:
                if row[col] in ("", "true", "false"):
                    continue
                token = row[col]
                assert repr(float(token)) == token or token.isdigit()

    def test_bad_spec_exits_2(self, capsys):
        assert run(capsys, "sweep", "--lambda", "0.2")[0] == 2
        assert run(capsys, "sweep", "--lambda", "0.2", "--x0", "1",
                   "--quantities", "bogus")[0] == 2


class TestFigure:
    @pytest.mark.parametrize("fig", ["fig2", "fig3", "fig4", "fig5", "fig6"])
    def test_generates_schema_valid_csv(self, fig, tmp_path, capsys):
        out = tmp_path / f"{fig}.csv"
        lam_override = ["--lambda", "0.05,0.2"] if fig in ("fig3", "fig6") \
            else []
        code = main(["figure", fig, "--out", str(out)] + lam_override)
        assert code == 0
        meta, columns, rows = parse_csv(out.read_text())
        assert meta["kind"] == fig
        assert "columns" in meta and set(meta["columns"]) == set(columns)
        assert len(rows) > 0
        for row in rows:
            assert set(row) == set(columns)

    def test_fig4_peak_moves_up_with_threshold(self, tmp_path):
        out = tmp_path / "fig4.csv"
        assert main(["figure", "fig4", "--out", str(out)]) == 0
        _, _, rows = parse_csv(out.read_text())
        peaks = {}
        for row in rows:
            x0, n, p = float(row["x0"]), int(row["n"]), float(row["p_n"])
            if x0 not in peaks or p > peaks[x0][1]:
                peaks[x0] = (n, p)
        argmaxes = [peaks[x0][0] for x0 in sorted(peaks)]
        assert argmaxes == sorted(argmaxes)
        assert argmaxes[0] == 0 and argmaxes[-1] >= 2

    def test_default_output_name(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["figure", "fig5"]) == 0
        assert (tmp_path / "fig5.csv").exists()

    def test_json_mirror_has_identical_fields(self, tmp_path):
        csv_path, json_path = tmp_path / "f.csv", tmp_path / "f.json"
        assert main(["figure", "fig4", "--out", str(csv_path)]) == 0
        assert main(["figure", "fig4", "--out", str(json_path),
                     "--format", "json"]) == 0
        meta, columns, rows = parse_csv(csv_path.read_text())
        payload = json.loads(json_path.read_text())
        assert payload["columns"] == columns
        assert payload["meta"] == meta
        assert len(payload["rows"]) == len(rows)
        assert payload["rows"][0]["p_n"] == float(rows[0]["p_n"])

    def test_unknown_figure_exits_2(self, capsys):
        assert run(capsys, "figure", "fig99")[0] == 2

    def test_byte_identical_reruns(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            assert main(["figure", "fig5", "--out", str(path)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestMonteCarloCommand:
    def test_byte_identical_reruns(self, tmp_path):
        paths = [tmp_path / "a.json", tmp_path / "b.json"]
        for path in paths:
            assert main(["montecarlo", "--lambda", "0.25", "--x0", "1",
                         "--shots", "20000", "--seed", "11",
                         "--out", str(path)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_reports_z_scores(self, capsys):
        code, out, _ = run(capsys, "montecarlo", "--lambda", "0.25", "--x0",
                           "1", "--eta", "0.8", "--shots", "50000",
                           "--seed", "3")
        assert code == 0
        record = json.loads(out)
        assert record["analytic_Q"] == qh.mandel_q(
            qh.Squeezing(0.25), qh.AcceptanceWindow.threshold(1.0),
            qh.DetectorModel(eta=0.8))
        for key in ("C", "mean", "Q"):
            assert abs(record["z_scores"][key]) < 5.0

    def test_bad_shots_exits_2(self, capsys):
        assert run(capsys, "montecarlo", "--lambda", "0.2", "--x0", "1",
                   "--shots", "0")[0] == 2


class TestSolveCommand:
    def test_x0_min(self, capsys):
        code, out, _ = run(capsys, "solve", "x0-min")
        record = json.loads(out)
        assert code == 0
        assert record["solution"] == pytest.approx(0.4248, abs=1e-4)

    def test_eta_threshold(self, capsys):
        code, out, _ = run(capsys, "solve", "eta-threshold", "--nbar", "0")
        assert code == 0 and json.loads(out)["solution"] == 0.5

    def test_x0_for_q(self, capsys):
        code, out, _ = run(capsys, "solve", "x0-for-q", "--lambda", "0.25",
                           "--q", "-0.216")
        record = json.loads(out)
        assert code == 0 and record["feasible"]
        assert record["solution"] == pytest.approx(2.0, abs=0.02)

    def test_optimal_lambda_boundary(self, capsys):
        code, out, _ = run(capsys, "solve", "optimal-lambda", "--q", "0")
        record = json.loads(out)
        assert code == 0 and record["boundary"]
        assert record["value"] == pytest.approx(0.548, abs=0.005)

    def test_infeasible_is_not_an_error_exit(self, capsys):
        code, out, _ = run(capsys, "solve", "x0-for-q", "--lambda", "0.2",
                           "--q", "0", "--eta", "0.45")
        assert code == 0
        assert json.loads(out)["feasible"] is False

    def test_missing_params_exit_2(self, capsys):
        assert run(capsys, "solve", "x0-for-q", "--q", "0")[0] == 2
        assert run(capsys, "solve", "optimal-lambda")[0] == 2


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quadherald.cli", "solve",
                           "eta-threshold", "--nbar", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["solution"] == 0.75
