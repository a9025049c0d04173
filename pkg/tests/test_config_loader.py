from pathlib import Path

import pytest

from app.errors import ConfigError
from app.models import MtdState, RunConfig
from app.services.config_loader import emit_config, load_config, parse_config

BASELINE_CFG = Path(__file__).resolve().parent.parent / "configs" / "baseline.cfg"


@pytest.mark.unit
class TestParseConfig:
    """Flat key = value parsing."""

    def test_gamma_and_epsilon(self):
        """Test gamma and epsilon."""
        config = parse_config("gamma = 0.9\nepsilon = 0.001")
        assert config.gamma == 0.9
        assert config.epsilon == 0.001
        assert config.cost_defend == 4.0

    def test_empty_text_gives_baseline(self):
        """Test empty text gives baseline."""
        config = parse_config("")
        assert (config.p_target, config.p_exploit, config.p_defend, config.p_breach) == (0.2, 0.2, 0.6, 0.4)
        assert (config.reward_base, config.reward_defend) == (10.0, 5.0)
        assert (config.cost_targeted, config.cost_exploit, config.cost_breach) == (0.1, 3.0, 4.0)
        assert (config.cost_reset, config.cost_defend) == (4.0, 4.0)
        assert (config.gamma, config.epsilon) == (0.9, 0.001)
        assert config == RunConfig()

    def test_gamma_out_of_bounds(self):
        """Test gamma out of bounds."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("epsilon = 0.01\ngamma = 1.5")
        assert excinfo.value.key == "gamma"
        assert excinfo.value.line == 2
        assert "(0, 1)" in str(excinfo.value)
        assert str(excinfo.value).startswith("line 2: gamma")

    def test_probability_bound_message(self):
        """Test probability bound message."""
        with pytest.raises(ConfigError, match=r"p_breach must lie in \[0, 1\]"):
            parse_config("p_breach = -0.1")

    def test_unparseable_number(self):
        """Test that a non-numeric value reports pydantic's message, not a bound."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("gamma = abc")
        assert excinfo.value.line == 1
        assert str(excinfo.value).startswith("line 1: gamma: ")
        assert "must lie in" not in str(excinfo.value)

    def test_unknown_key_line(self):
        """Test unknown key line."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("gamma = 0.9\n\n# comment\ncost_patch = 1")
        assert excinfo.value.line == 4
        assert excinfo.value.key == "cost_patch"

    def test_syntax_error_line(self):
        """Test syntax error line."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("gamma = 0.9\nepsilon 0.01\n")
        assert excinfo.value.line == 2

    def test_missing_value(self):
        """Test missing value."""
        with pytest.raises(ConfigError, match="missing value"):
            parse_config("gamma =\n")

    def test_duplicate_key(self):
        """Test duplicate key."""
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("gamma = 0.9\ngamma = 0.8\n")

    def test_comments_ignored(self):
        """Test comments ignored."""
        config = parse_config("# discount\ngamma = 0.8  # lower than baseline\n\n   \ncost_defend = 6\n")
        assert config.gamma == 0.8
        assert config.cost_defend == 6.0

    def test_experiment_settings(self):
        """Test experiment settings."""
        config = parse_config(
            "experiment = sweep\nsweep_parameter = cost_reset\nstate = B\nseed = 12\nbreach_defendable = true\n"
        )
        assert config.experiment == "sweep"
        assert config.sweep_parameter == "cost_reset"
        assert config.state == MtdState.B
        assert config.seed == 12
        assert config.breach_defendable is True

    def test_bad_literal(self):
        """Test bad literal."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("experiment = plot\n")
        assert excinfo.value.key == "experiment"

    def test_to_params(self):
        """Test to_params drops run settings."""
        params = parse_config("cost_defend = 6\nseed = 3").to_params()
        assert params.cost_defend == 6.0
        assert not hasattr(params, "seed")


@pytest.mark.unit
class TestEmitConfig:
    """Canonical text form."""

    def test_round_trip_defaults(self):
        """Test round trip defaults."""
        config = RunConfig()
        assert parse_config(emit_config(config)) == config

    def test_round_trip_custom(self):
        """Test round trip custom."""
        config = RunConfig(
            gamma=0.95,
            epsilon=1e-7,
            cost_defend=4.335,
            breach_defendable=True,
            experiment="phase",
            state=MtdState.T,
            scale_base=10.0,
            horizon=150,
            output="runs/phase diagram #1.csv",
        )
        assert parse_config(emit_config(config)) == config

    def test_lowercase_booleans(self):
        """Test lowercase booleans."""
        assert "breach_defendable = false\n" in emit_config(RunConfig())

    def test_none_left_out(self):
        """Test none left out."""
        assert "horizon" not in emit_config(RunConfig())


@pytest.mark.unit
class TestLoadConfig:
    """Reading configuration files."""

    def test_shipped_baseline(self):
        """Test shipped baseline."""
        assert load_config(BASELINE_CFG) == RunConfig()

    def test_missing_file(self, tmp_path):
        """Test missing file."""
        with pytest.raises(ConfigError, match="cannot read config"):
            load_config(tmp_path / "absent.cfg")

    def test_file_round_trip(self, tmp_path):
        """Test file round trip."""
        path = tmp_path / "run.cfg"
        config = RunConfig(experiment="mc-eval", episodes=500, seed=9)
        path.write_text(emit_config(config), encoding="utf-8")
        assert load_config(path) == config
