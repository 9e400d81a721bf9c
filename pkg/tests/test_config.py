"""Tests for configuration loading and overrides."""

import shutil
from pathlib import Path

import pytest

from umbilic4.config import RunConfig, Tolerances, load_config, with_overrides
from umbilic4.errors import ValidationError

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Empty working directory with no environment overrides."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("UMBILIC4_SEED", raising=False)
    monkeypatch.delenv("UMBILIC4_TOL_SCALE", raising=False)
    return tmp_path


class TestDefaults:
    """Tests for built-in defaults."""

    def test_no_files(self, workdir):
        config = load_config()
        assert config == RunConfig()
        assert config.seed == 0
        assert config.format == "json"

    def test_effective_tolerance(self):
        config = RunConfig(tol_scale=10.0)
        assert config.tol("gc_so3") == pytest.approx(1e-3)

    def test_echo(self):
        data = RunConfig(tol_scale=2.0).echo()
        assert data["tolerances"]["calibration"] == 1e-8
        assert data["effective_tolerances"]["calibration"] == pytest.approx(2e-8)
        assert set(data["effective_tolerances"]) == set(data["tolerances"])


class TestFiles:
    """Tests for TOML sources and their precedence."""

    def test_pyproject_section(self, workdir):
        shutil.copy(FIXTURES / "pyproject.toml", workdir / "pyproject.toml")
        config = load_config()
        assert config.seed == 7
        assert config.samples == 5
        assert config.format == "csv"
        assert config.tolerances.calibration == 1e-9
        assert config.tolerances.gc_so3 == 2e-4
        assert config.tolerances.drift_so3 == Tolerances().drift_so3

    def test_umbilic4_toml_wins(self, workdir):
        shutil.copy(FIXTURES / "pyproject.toml", workdir / "pyproject.toml")
        (workdir / "umbilic4.toml").write_text("[umbilic4]\nseed = 11\n")
        assert load_config().seed == 11

    def test_explicit_path(self, workdir):
        path = workdir / "run.toml"
        path.write_text("[umbilic4]\nmax_den = 24\ntol_scale = 0.5\n")
        config = load_config(path)
        assert config.max_den == 24
        assert config.tol_scale == 0.5

    def test_missing_explicit_path(self, workdir):
        with pytest.raises(FileNotFoundError):
            load_config(workdir / "absent.toml")

    def test_unknown_key(self, workdir):
        (workdir / "umbilic4.toml").write_text("[umbilic4]\nseeds = 1\n")
        with pytest.raises(ValidationError, match="Unknown key"):
            load_config()

    def test_unknown_tolerance(self, workdir):
        (workdir / "umbilic4.toml").write_text("[umbilic4.tolerances]\ncalibrate = 1e-3\n")
        with pytest.raises(ValidationError, match="Unknown key"):
            load_config()

    def test_bad_value(self, workdir):
        (workdir / "umbilic4.toml").write_text('[umbilic4]\nsamples = "many"\n')
        with pytest.raises(ValidationError, match="Invalid configuration value"):
            load_config()

    @pytest.mark.parametrize("line", ['format = "xml"', "tol_scale = 0", "samples = 0", "fd_step = 2.0"])
    def test_rejected_values(self, workdir, line):
        (workdir / "umbilic4.toml").write_text(f"[umbilic4]\n{line}\n")
        with pytest.raises(ValidationError):
            load_config()


class TestEnvironment:
    """Tests for environment and .env overrides."""

    def test_env_beats_file(self, workdir, monkeypatch):
        (workdir / "umbilic4.toml").write_text("[umbilic4]\nseed = 3\n")
        monkeypatch.setenv("UMBILIC4_SEED", "42")
        monkeypatch.setenv("UMBILIC4_TOL_SCALE", "0.25")
        config = load_config()
        assert config.seed == 42
        assert config.tol_scale == 0.25

    def test_bad_env_value(self, workdir, monkeypatch):
        monkeypatch.setenv("UMBILIC4_SEED", "abc")
        with pytest.raises(ValidationError):
            load_config()


class TestOverrides:
    """Tests for CLI-level overrides."""

    def test_none_is_ignored(self):
        config = with_overrides(RunConfig(seed=5), seed=None, samples=3)
        assert config.seed == 5
        assert config.samples == 3

    def test_revalidates(self):
        with pytest.raises(ValidationError):
            with_overrides(RunConfig(), tol_scale=-1.0)

    def test_unknown_override(self):
        with pytest.raises(ValidationError, match="Unknown key"):
            with_overrides(RunConfig(), colour="red")
