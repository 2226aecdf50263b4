"""
Test suite for settings loading
"""

import pytest

from src.utils.config import DEFAULT_CONFIG_FILE, ConfigError, NullLdaSettings, load_config


class TestLoadConfig:
    """Test cases for YAML settings with environment overrides."""

    def test_shipped_defaults(self):
        """Test the shipped config file holds the documented defaults."""
        assert DEFAULT_CONFIG_FILE.exists()
        settings = load_config()

        assert settings.fit.seed == 0
        assert settings.fit.max_retries == 5
        assert settings.fit.near_singular_threshold == 1e-8
        assert settings.structure.unit_eigenvalue_tol == 1e-8
        assert settings.rank.relative_tol is None
        assert settings.logging.level == "WARNING"

    def test_yaml_values(self, tmp_path):
        """Test values from a custom YAML file."""
        path = tmp_path / "custom.yaml"
        path.write_text("nulllda:\n  fit:\n    seed: 42\n    max_retries: 1\n", encoding="utf-8")
        settings = load_config(path)

        assert settings.fit.seed == 42
        assert settings.fit.max_retries == 1
        assert settings.fit.near_singular_threshold == 1e-8

    def test_environment_overrides_yaml(self, tmp_path, monkeypatch):
        """Test NULLLDA_ variables beat the file."""
        path = tmp_path / "custom.yaml"
        path.write_text("nulllda:\n  fit:\n    seed: 42\n", encoding="utf-8")
        monkeypatch.setenv("NULLLDA_FIT__MAX_RETRIES", "9")
        settings = load_config(path)

        assert settings.fit.max_retries == 9
        assert settings.fit.seed == 42

    def test_missing_explicit_file(self, tmp_path):
        """Test an explicit path that does not exist."""
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_value(self, tmp_path):
        """Test out-of-range values are rejected."""
        path = tmp_path / "bad.yaml"
        path.write_text("nulllda:\n  fit:\n    near_singular_threshold: 2.0\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="Invalid configuration"):
            load_config(path)

    def test_section_must_be_mapping(self, tmp_path):
        """Test a scalar under the nulllda key."""
        path = tmp_path / "bad.yaml"
        path.write_text("nulllda: 3\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="mapping"):
            load_config(path)


class TestLoggingSettings:
    """Test cases for the logging section."""

    def test_unknown_level_is_rejected(self, tmp_path):
        """Test a level name the logging module does not know."""
        path = tmp_path / "bad.yaml"
        path.write_text("nulllda:\n  logging:\n    level: verbose\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="Invalid configuration"):
            load_config(path)

    def test_level_is_case_insensitive(self):
        """Test lower-case level names."""
        assert NullLdaSettings(logging={"level": "info"}).logging.level == "INFO"

    def test_environment_level(self, monkeypatch):
        """Test the level from the environment."""
        monkeypatch.setenv("NULLLDA_LOGGING__LEVEL", "debug")
        assert NullLdaSettings().logging.level == "DEBUG"
