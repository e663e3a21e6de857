import numpy as np
import pytest

import proxalt as pa
from proxalt.cli import main


def read_lines(path):
    return path.read_text().splitlines()


class TestRun:
    def test_quadratic_single_step(self, tmp_path):
        out = tmp_path / "runq"
        code = main(["run", "--quadratic", "--dim", "4", "--methods", "vanilla",
                     "--budget", "5", "--tol", "1e-15", "--out", str(out)])
        assert code == 0
        trace = pa.read_trace(out / "trace_vanilla.csv")
        # gamma = 1/L solves it in one step (up to the Lipschitz inflation)
        assert trace.records[1].F <= 1e-12

    def test_three_method_comparison(self, tmp_path):
        out = tmp_path / "cmp"
        code = main(["run", "--lasso", "60x40", "--lambda1", "0.3",
                     "--methods", "vanilla,altinertia,fista",
                     "--schedule", "power:3,0.8", "--gamma", "1/L",
                     "--budget", "120", "--out", str(out)])
        assert code == 0
        for name in ("vanilla", "alt_inertia", "inertial"):
            assert (out / f"trace_{name}.csv").exists()
        assert (out / "summary.csv").exists()
        assert (out / "config.echo.toml").exists()

    def test_shared_starting_point(self, tmp_path):
        out = tmp_path / "shared"
        main(["run", "--lasso", "60x40", "--lambda1", "0.3",
              "--methods", "vanilla,mfista,altextra", "--schedule", "nesterov",
              "--budget", "40", "--out", str(out)])
        first = {
            name: read_lines(out / f"trace_{name}.csv")[1]
            for name in ("vanilla", "mfista", "alt_extrapolation")
        }
        f_values = {line.split(",")[1] for line in first.values()}
        assert len(f_values) == 1  # bit-equal F(x0) in every trace

    def test_summary_budget_accounting(self, tmp_path):
        out = tmp_path / "acct"
        main(["run", "--lasso", "60x40", "--lambda1", "0.3",
              "--methods", "vanilla", "--budget", "75", "--out", str(out)])
        trace_lines = read_lines(out / "trace_vanilla.csv")
        summary = [l for l in read_lines(out / "summary.csv")
                   if l.startswith("vanilla,total")]
        assert summary == [f"vanilla,total,{len(trace_lines) - 2}"]

    def test_reproducible_traces_bit_identical(self, tmp_path):
        args = ["run", "--lasso", "50x30", "--lambda1", "0.25",
                "--methods", "vanilla,altinertia", "--schedule", "power:3,0.8",
                "--budget", "60", "--seed", "11"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        for name in ("vanilla", "alt_inertia"):
            a = (out1 / f"trace_{name}.csv").read_bytes()
            b = (out2 / f"trace_{name}.csv").read_bytes()
            assert a == b

    def test_config_file_defaults_and_flag_override(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text('lasso = "50x30"\nlambda1 = "0.25"\nbudget = 30\n'
                       'methods = "vanilla"\n')
        out = tmp_path / "cfg"
        code = main(["run", "--config", str(cfg), "--budget", "12",
                     "--out", str(out)])
        assert code == 0
        trace = pa.read_trace(out / "trace_vanilla.csv")
        assert trace.records[-1].prox_evals == 12  # flag beat the file

    def test_raw_alpha_escape_hatch(self, tmp_path):
        out = tmp_path / "raw"
        code = main(["run", "--lasso", "50x30", "--lambda1", "0.25",
                     "--methods", "altinertia", "--schedule", "nesterov",
                     "--raw-section5-alpha", "--budget", "30",
                     "--out", str(out)])
        assert code == 0

    def test_gmax_step_policy(self, tmp_path):
        out = tmp_path / "gmax"
        code = main(["run", "--quadratic", "--dim", "3", "--methods", "vanilla",
                     "--gamma", "gmax/3", "--probe-iters", "400",
                     "--budget", "50", "--out", str(out)])
        assert code == 0

    def test_compare_alias(self, tmp_path):
        out = tmp_path / "alias"
        assert main(["compare", "--quadratic", "--methods", "vanilla",
                     "--budget", "5", "--out", str(out)]) == 0


class TestExitCodes:
    def test_usage_error_is_one(self):
        assert main(["run", "--no-such-flag"]) == 1
        assert main(["run", "--lasso", "bogus", "--out", "/tmp/x"]) == 1
        assert main([]) == 1

    def test_missing_dataset_is_runtime_error(self, tmp_path):
        code = main(["run", "--ionosphere", str(tmp_path / "absent.csv"),
                     "--out", str(tmp_path / "o")])
        assert code == 2

    def test_divergent_gamma_is_runtime_error(self, tmp_path):
        code = main(["run", "--lasso", "40x20", "--lambda1", "0.3",
                     "--gamma", "1000.0", "--budget", "200",
                     "--out", str(tmp_path / "d")])
        assert code == 2


class TestVerify:
    def test_small_suite_passes(self, tmp_path, capsys):
        out = tmp_path / "checks.csv"
        code = main(["verify", "--families", "quadratic_zero,lasso_130x80_half",
                     "--seeds", "2", "--samples", "500", "--out", str(out)])
        assert code == 0
        lines = read_lines(out)
        assert lines[0].startswith("check_name,")
        assert len(lines) == 1 + 2 * 2 * 4  # families x seeds x checks

    def test_gated_checks_do_not_fail(self, tmp_path):
        # the sqrt-penalty family gates its convex-only checks; still exit 0
        out = tmp_path / "gated.csv"
        code = main(["verify", "--families", "lasso_130x80_half", "--seeds", "1",
                     "--samples", "200", "--out", str(out)])
        assert code == 0
        assert any(",0," in l and l.rstrip().endswith("hypothesis unmet: "
                                                      "regularizer is not convex")
                   for l in read_lines(out)[1:])

    def test_corrupted_tolerance_fails_with_three(self, tmp_path):
        code = main(["verify", "--families", "quadratic_zero", "--seeds", "1",
                     "--samples", "200", "--corrupt-tolerance", "1.0",
                     "--out", str(tmp_path / "bad.csv")])
        assert code == 3

    def test_unknown_family_is_usage_error(self, tmp_path):
        assert main(["verify", "--families", "nope"]) == 1


class TestKlsim:
    def test_finite_column(self, tmp_path, capsys):
        out = tmp_path / "fin.csv"
        code = main(["klsim", "--theta", "1.0", "--regime", "a", "--coef", "0.1",
                     "--K", "200", "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "pass=True" in text
        lines = read_lines(out)
        assert lines[0] == "k,r_k,bound_k"
        assert len(lines) == 202

    def test_geometric_cell(self, capsys):
        code = main(["klsim", "--theta", "0.5", "--regime", "a", "--coef", "0.1",
                     "--K", "2000"])
        assert code == 0
        text = capsys.readouterr().out
        assert "pass=True" in text

    def test_regime_b_slope(self, capsys):
        code = main(["klsim", "--theta", "0.25", "--regime", "b", "--coef", "0.1",
                     "--d", "0.4", "--K", "100000"])
        assert code == 0
        out = capsys.readouterr().out
        assert "expected=-1.2" in out and "pass=True" in out


class TestGammaMax:
    def test_quadratic_table(self, capsys):
        code = main(["gammamax", "--quadratic", "--dim", "4",
                     "--probe-iters", "2000"])
        assert code == 0
        out = capsys.readouterr().out
        assert "gamma_max" in out
        gmax = float(out.splitlines()[1].split("=")[1].split("(")[0])
        assert gmax == pytest.approx(1.0, rel=0.02)
        assert "gamma_max/8" in out and "gamma_max/1.5" in out
