import pytest

from models.experiment import ExperimentName
from services.config_service import from_environment, load_config
from services.exceptions import ConfigError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "born.env"
    path.write_text("ETA=3.0\nAlpha=0.2\nTOL_EPS_FACT=1e-8\n")
    return path


class TestLoadConfig:
    def test_defaults(self):
        config = load_config("born", environ={})
        assert config.experiment == ExperimentName.BORN
        assert config.eta == 1.0
        assert config.tolerances == {}

    def test_precedence(self, config_file):
        environ = {"INL_ETA": "2.0", "INL_SEED": "5"}
        assert load_config("born", environ=environ).eta == 2.0
        from_file = load_config("born", config_file, environ=environ)
        assert from_file.eta == 3.0
        assert from_file.seed == 5
        assert from_file.alpha == 0.2
        flags = load_config("born", config_file, {"eta": 4.0, "alpha": None}, environ=environ)
        assert flags.eta == 4.0
        assert flags.alpha == 0.2

    def test_tolerances(self, config_file):
        config = load_config("born", config_file, environ={"TOL_BORN_SIGMA": "4"})
        assert config.tolerance("eps_fact", 1e-9) == 1e-8
        assert config.tolerance("born_sigma", 3.0) == 4.0
        assert config.tolerance("missing", 0.5) == 0.5

    def test_unknown_file_key(self, tmp_path):
        path = tmp_path / "bad.env"
        path.write_text("ETAA=1\n")
        with pytest.raises(ConfigError):
            load_config("born", path, environ={})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config("born", tmp_path / "missing.env", environ={})

    def test_invalid_value(self):
        with pytest.raises(ConfigError):
            load_config("born", overrides={"alpha": 1.5}, environ={})

    def test_bad_tolerance(self, tmp_path):
        path = tmp_path / "tol.env"
        path.write_text("TOL_EPS_FACT=small\n")
        with pytest.raises(ConfigError):
            load_config("born", path, environ={})

    def test_output_alias(self, tmp_path):
        path = tmp_path / "out.env"
        path.write_text(f"OUT={tmp_path / 'data.csv'}\n")
        assert load_config("born", path, environ={}).out_path == tmp_path / "data.csv"


class TestFromEnvironment:
    def test_ignores_unrelated_keys(self):
        values = from_environment({"INL_FOO": "1", "INL_OUTPUT_DIR": "x", "HOME": "/root", "INL_TRAJECTORIES": "10"})
        assert values == {"trajectories": "10"}
