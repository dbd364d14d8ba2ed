import json
import subprocess
import sys

import pytest

from ruinwalk import cli

from conftest import SQRT3


def run_cli(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


class TestAnalytic:
    def test_json_schema_and_spot_value(self, capsys):
        code, out, _ = run_cli(
            ["analytic", "--p", "0.5", "--s", "0.5", "--i0", "1", "--strategy", "B"],
            capsys,
        )
        assert code == 0
        report = json.loads(out)
        assert set(report) == {"params", "strategy", "absorption", "times", "diagnostics"}
        assert report["absorption"]["p0"] == pytest.approx(4.0 - 2.0 * SQRT3, rel=1e-9)
        assert report["params"]["q"] == 0.5
        assert set(report["diagnostics"]) == {"tau1", "tau2", "theta", "phi1", "phi2"}
        assert len(report["absorption"]["pk"]) == 64

    def test_json_round_trips(self, capsys):
        args = ["analytic", "--p", "0.45", "--s", "0.3", "--i0", "2", "--strategy", "C"]
        code, out, _ = run_cli(args, capsys)
        report = json.loads(out)
        assert json.loads(json.dumps(report)) == report

    def test_no_stop_risk_seeking_is_certain_ruin(self, capsys):
        code, out, _ = run_cli(
            ["analytic", "--p", "0.5", "--s", "0", "--i0", "2", "--strategy", "C"],
            capsys,
        )
        assert code == 0
        assert json.loads(out)["absorption"]["p0"] == 1.0

    def test_invalid_p_exits_2_with_json_error(self, capsys):
        code, out, err = run_cli(
            ["analytic", "--p", "1.2", "--s", "0.5", "--i0", "1", "--strategy", "B"],
            capsys,
        )
        assert code == 2
        assert "error" in json.loads(err)

    def test_conditional_times_flag(self, capsys):
        code, out, _ = run_cli(
            ["analytic", "--p", "0.4", "--s", "0.5", "--i0", "1", "--strategy", "B",
             "--kmax", "8", "--conditional"],
            capsys,
        )
        report = json.loads(out)
        cond = report["conditional_times"]
        et = report["times"]["et"]
        p0 = report["absorption"]["p0"]
        assert cond[0] == pytest.approx(et[0] / p0, rel=1e-12)

    def test_mgf_values_at_requested_z(self, capsys):
        code, out, _ = run_cli(
            ["analytic", "--p", "0.4", "--s", "0.5", "--i0", "2", "--strategy", "A",
             "--kmax", "4", "--z", "0.5"],
            capsys,
        )
        report = json.loads(out)
        assert report["mgf"]["z"] == 0.5
        assert len(report["mgf"]["barrier_values"]) == 5

    def test_table_format(self, capsys):
        code, out, _ = run_cli(
            ["analytic", "--p", "0.4", "--s", "0.5", "--i0", "1", "--strategy", "B",
             "--kmax", "2", "--format", "table"],
            capsys,
        )
        assert code == 0
        assert "absorption.p0" in out


class TestSimulate:
    def test_deterministic_output(self, capsys):
        args = ["simulate", "--p", "0.5", "--s", "0.5", "--i0", "1", "--strategy", "B",
                "--trials", "20000", "--seed", "42"]
        _, out1, _ = run_cli(args, capsys)
        _, out2, _ = run_cli(args, capsys)
        assert out1 == out2

    def test_all_stop_eager_mean_time_zero(self, capsys):
        code, out, _ = run_cli(
            ["simulate", "--p", "0.3", "--s", "1", "--i0", "2", "--strategy", "A",
             "--trials", "500", "--seed", "1"],
            capsys,
        )
        assert json.loads(out)["mean_time"] == 0.0

    def test_no_stop_mean_near_classical_value(self, capsys):
        code, out, _ = run_cli(
            ["simulate", "--p", "0.4", "--s", "0", "--i0", "2", "--strategy", "B",
             "--trials", "200000", "--seed", "7"],
            capsys,
        )
        report = json.loads(out)
        assert abs(report["mean_time"] - 10.0) < 4.0 * report["mean_time_se"]


class TestExact:
    def test_reports_solution(self, capsys):
        code, out, _ = run_cli(
            ["exact", "--p", "0.5", "--s", "0.5", "--i0", "1", "--strategy", "B",
             "--kmax", "8"],
            capsys,
        )
        report = json.loads(out)
        assert report["absorption"]["p0"] == pytest.approx(4 - 2 * SQRT3, abs=1e-9)
        assert report["times"]["m_total"] == pytest.approx(2 * (SQRT3 - 1), abs=1e-9)


class TestMgfCommand:
    def test_dp_cross_check_gap_is_small(self, capsys):
        code, out, _ = run_cli(
            ["mgf", "--p", "0.5", "--s", "0.5", "--i0", "2", "--strategy", "A",
             "--z", "0.5", "--state", "1", "--check-dp"],
            capsys,
        )
        report = json.loads(out)
        assert report["dp_gap"] < 1e-8


class TestVerify:
    def test_quick_suite_passes(self, capsys):
        code, out, _ = run_cli(["verify", "--quick"], capsys)
        assert code == 0
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_injected_wrong_mean_time_fails_named_check(self, capsys):
        code, out, _ = run_cli(["verify", "--quick", "--inject-wrong-mb"], capsys)
        assert code == 1
        assert "m_B relation" in out
        failing = [line for line in out.splitlines() if line.startswith("FAIL")]
        assert len(failing) == 1 and "m_B relation" in failing[0]


class TestSweep:
    def test_three_point_sweep(self, capsys):
        code, out, _ = run_cli(
            ["sweep", "--p", "0.3:0.4:0.05", "--s", "0.5", "--i0", "1",
             "--strategy", "B"],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 4  # header + 3 rows
        header = lines[0].split(",")
        assert header == list(cli._SWEEP_COLUMNS)

    def test_bc_ratio_column_below_one(self, capsys):
        code, out, _ = run_cli(
            ["sweep", "--p", "0.3:0.7:0.2", "--s", "0.1:0.9:0.4", "--i0", "1",
             "--strategy", "B"],
            capsys,
        )
        lines = out.strip().splitlines()
        idx = lines[0].split(",").index("bc_ratio")
        for line in lines[1:]:
            assert float(line.split(",")[idx]) < 1.0

    def test_row_order_is_lexicographic(self, capsys):
        code, out, _ = run_cli(
            ["sweep", "--p", "0.3:0.4:0.1", "--s", "0.2:0.3:0.1", "--i0", "1",
             "--strategy", "all"],
            capsys,
        )
        lines = out.strip().splitlines()[1:]
        keys = []
        for line in lines:
            cells = line.split(",")
            keys.append((float(cells[0]), float(cells[1]), int(cells[2]), cells[3]))
        assert keys == sorted(keys)

    def test_empty_range_emits_header_only(self, capsys):
        code, out, _ = run_cli(
            ["sweep", "--p", "0.7:0.3:0.05", "--s", "0.5", "--i0", "1"],
            capsys,
        )
        assert code == 0
        assert out.strip().splitlines() == [",".join(cli._SWEEP_COLUMNS)]

    def test_malformed_range_exits_2(self, capsys):
        code, _, err = run_cli(
            ["sweep", "--p", "0.3:bad", "--s", "0.5", "--i0", "1"], capsys
        )
        assert code == 2
        assert "error" in json.loads(err)

    def test_out_file(self, tmp_path, capsys):
        target = tmp_path / "rows.csv"
        code, out, _ = run_cli(
            ["sweep", "--p", "0.4", "--s", "0.5", "--i0", "1", "--strategy", "B",
             "--out", str(target)],
            capsys,
        )
        assert code == 0 and out == ""
        lines = target.read_text().strip().splitlines()
        assert len(lines) == 2


class TestSubprocessEntryPoints:
    def test_module_invocation_bytes_identical(self):
        cmd = [sys.executable, "-m", "ruinwalk", "simulate", "--p", "0.5", "--s", "0.5",
               "--i0", "1", "--strategy", "B", "--trials", "20000", "--seed", "42"]
        a = subprocess.run(cmd, capture_output=True, check=True)
        b = subprocess.run(cmd, capture_output=True, check=True)
        assert a.stdout == b.stdout

    def test_usage_error_exits_2(self):
        cmd = [sys.executable, "-m", "ruinwalk", "analytic", "--p", "0.5"]
        proc = subprocess.run(cmd, capture_output=True)
        assert proc.returncode == 2
