import io
from pathlib import Path
from unittest.mock import patch

import pandas as pd
import pytest
from click.testing import CliRunner

from app.errors import NonConvergenceError
from app.main import cli, run_command

runner = CliRunner()
BASELINE_CFG = str(Path(__file__).resolve().parent.parent / "configs" / "baseline.cfg")


def read_csv(text):
    return pd.read_csv(io.StringIO(text), keep_default_na=False)


@pytest.mark.integration
class TestSolveCommand:
    """`solve` prints the converged table."""

    def test_solve_baseline(self):
        """Test solve baseline."""
        result = runner.invoke(cli, ["solve", "--config", BASELINE_CFG])
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "state,value,action,Q_wait,Q_defend,Q_reset"
        frame = read_csv(result.stdout)
        assert list(frame["state"]) == ["N", "T", "E", "B"]
        assert frame.loc[frame["state"] == "B", "action"].item() == "Reset"
        assert frame.loc[frame["state"] == "B", "Q_defend"].item() == ""

    def test_set_override(self):
        """Test set override."""
        result = runner.invoke(cli, ["solve", "--set", "cost_defend=6"])
        assert result.exit_code == 0
        frame = read_csv(result.stdout)
        assert frame.loc[frame["state"] == "E", "action"].item() == "Reset"

    def test_output_file(self, tmp_path):
        """Test output file."""
        target = tmp_path / "solve.csv"
        result = runner.invoke(cli, ["solve", "--output", str(target)])
        assert result.exit_code == 0
        assert result.stdout == ""
        assert target.read_text(encoding="utf-8").startswith("state,value,action")


@pytest.mark.integration
class TestSweepCommand:
    """`sweep` and `turning-point`."""

    ARGS = ["sweep", "--param", "cost_defend", "--from", "0.05", "--to", "1.0", "--step", "0.025"]

    def test_header_and_rows(self):
        """Test header and rows."""
        result = runner.invoke(cli, self.ARGS)
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "cost_pct,V_wait_E,V_defend_E,V_reset_E,opt_N,opt_T,opt_E,opt_B"
        assert len(lines) == 40
        assert lines[1].startswith("5.000000,")

    def test_opt_column_is_argmax(self):
        """Test the opt column is the argmax of the value columns."""
        frame = read_csv(runner.invoke(cli, self.ARGS).stdout)
        columns = {"Wait": "V_wait_E", "Defend": "V_defend_E", "Reset": "V_reset_E"}
        for _, row in frame.iterrows():
            best = max(columns, key=lambda action: float(row[columns[action]]))
            assert row["opt_E"] == best

    def test_byte_identical_reruns(self, tmp_path):
        """Test byte identical reruns."""
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_command(self.ARGS + ["--output", str(first)]) == 0
        assert run_command(self.ARGS + ["--output", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_state_and_without(self):
        """Test state and without."""
        result = runner.invoke(
            cli, ["sweep", "--from", "0.1", "--to", "0.5", "--step", "0.1", "--state", "N", "--without", "Reset"]
        )
        assert result.exit_code == 0
        frame = read_csv(result.stdout)
        assert list(frame.columns[:4]) == ["cost_pct", "V_wait_N", "V_defend_N", "V_reset_N"]
        assert set(frame["V_reset_N"]) == {""}
        assert "Reset" not in set(frame["opt_E"])

    def test_turning_point(self):
        """Test turning point."""
        result = runner.invoke(cli, ["turning-point", "--param", "cost_defend", "--state", "E"])
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "state,from,to,lo,hi"
        state, start, end, lo, hi = lines[1].split(",")
        assert (state, start, end) == ("E", "Defend", "Reset")
        assert 0.275 <= float(lo) < float(hi) <= 0.30


@pytest.mark.integration
class TestPhaseCommands:
    """`phase` and `case-study`."""

    def test_phase_grid(self):
        """Test phase grid."""
        result = runner.invoke(cli, ["phase", "--x", "cost_defend", "--y", "cost_exploit", "--step", "0.25"])
        assert result.exit_code == 0
        lines = result.stdout.splitlines()
        assert lines[0] == "x_pct,y_pct,opt_action"
        assert len(lines) == 26
        assert lines[-1] == "100.000000,100.000000,Reset"

    def test_case_study_scit(self):
        """Test the SCIT case study grid size."""
        result = runner.invoke(cli, ["case-study", "scit", "--set", "gamma=0.5"])
        assert result.exit_code == 0
        assert len(result.stdout.splitlines()) == 401


@pytest.mark.integration
class TestOracleCommands:
    """`enumerate` and `mc-eval`."""

    def test_enumerate(self):
        """Test enumerate lists 54 policies with one envelope match."""
        result = runner.invoke(cli, ["enumerate"])
        assert result.exit_code == 0
        frame = read_csv(result.stdout)
        assert len(frame) == 54
        assert frame["attains_envelope"].astype(str).tolist().count("True") == 1

    def test_mc_eval_reproducible(self):
        """Test mc-eval reruns are identical."""
        args = ["mc-eval", "--state", "E", "--episodes", "500", "--seed", "3"]
        first = runner.invoke(cli, args)
        second = runner.invoke(cli, args)
        assert first.exit_code == 0
        assert first.stdout == second.stdout
        assert first.stdout.splitlines()[0] == "state,episodes,horizon,seed,mean_return,standard_error,solver_value"

    def test_mc_eval_pinned_action(self):
        """Test a pinned action leaves the solver value blank."""
        result = runner.invoke(cli, ["mc-eval", "--episodes", "50", "--action", "E=Wait"])
        assert result.exit_code == 0
        assert result.stdout.splitlines()[1].endswith(",")


@pytest.mark.integration
class TestRunCommand:
    """`run` dispatches on the configured experiment."""

    def test_sweep_from_config(self, tmp_path):
        """Test sweep from config."""
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("experiment = sweep\nsweep_from = 0.25\nsweep_to = 0.5\nsweep_step = 0.25\n", encoding="utf-8")
        result = runner.invoke(cli, ["run", "--config", str(cfg)])
        assert result.exit_code == 0
        assert len(result.stdout.splitlines()) == 3

    def test_verbose_flag(self):
        """Test verbose flag."""
        result = runner.invoke(cli, ["--verbose", "solve"])
        assert result.exit_code == 0


@pytest.mark.unit
class TestExitCodes:
    """run_command maps failures to exit codes with an `error:` prefix."""

    def test_unknown_subcommand(self, capsys):
        """Test unknown subcommand."""
        assert run_command(["plot"]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "Usage:" in err

    def test_bad_assignment(self, capsys):
        """Test bad assignment."""
        assert run_command(["solve", "--set", "gamma"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_config_bound_violation(self, tmp_path, capsys):
        """Test config bound violation."""
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("gamma = 1.5\n", encoding="utf-8")
        assert run_command(["solve", "--config", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error: line 1: gamma")

    def test_missing_config(self, tmp_path, capsys):
        """Test missing config."""
        assert run_command(["solve", "--config", str(tmp_path / "nope.cfg")]) == 2
        assert "cannot read config" in capsys.readouterr().err

    def test_override_validation(self, capsys):
        """Test override validation."""
        assert run_command(["case-study", "decoy", "--set", "gamma=1.5"]) == 2
        assert capsys.readouterr().err.startswith("error: gamma")

    def test_non_convergence(self, capsys):
        """Test non-convergence exits with 3."""
        with patch(
            "app.commands.solve.value_iteration",
            side_effect=NonConvergenceError(None, "value iteration did not converge after 3 iterations"),
        ):
            assert run_command(["solve"]) == 3
        assert capsys.readouterr().err.startswith("error: value iteration did not converge")

    def test_no_crossing(self, capsys):
        """Test no crossing."""
        assert run_command(["turning-point", "--lo", "0.5", "--hi", "0.6"]) == 3

    def test_horizon_too_short(self, capsys):
        """Test horizon too short."""
        assert run_command(["mc-eval", "--episodes", "10", "--horizon", "10"]) == 1
        assert "need at least" in capsys.readouterr().err

    def test_success(self, capsys):
        """Test a clean run exits with 0."""
        assert run_command(["solve"]) == 0
        assert capsys.readouterr().out.startswith("state,value,action")
