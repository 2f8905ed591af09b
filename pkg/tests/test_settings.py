#!/usr/bin/env python3
"""
Tests for settings resolution from the environment and .env.treedist
"""

import pytest

from treedist.errors import SettingsError
from treedist.geo_models import DEFAULT_CHAIN_CAP
from treedist.settings import ENV_FILE_NAME, get_settings, load_settings, reset_settings


class TestLoadSettings:
    """Environment over dotenv file over built-in defaults"""

    def test_defaults(self):
        settings = load_settings()
        assert settings.algorithm == "divide"
        assert settings.chain_cap == DEFAULT_CHAIN_CAP
        assert settings.output_format == "csv"
        assert settings.log_level == "WARNING"
        assert settings.include_leaves is False
        assert settings.default_length is None
        assert settings.otlp_endpoint is None
        assert settings.workers >= 1

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("TREEDIST_ALGORITHM", "brute")
        monkeypatch.setenv("TREEDIST_CHAIN_CAP", "500")
        monkeypatch.setenv("TREEDIST_WORKERS", "3")
        monkeypatch.setenv("TREEDIST_INCLUDE_LEAVES", "true")
        settings = load_settings()
        assert settings.algorithm == "brute"
        assert settings.chain_cap == 500
        assert settings.workers == 3
        assert settings.include_leaves is True

    def test_env_file_in_working_directory(self, isolated_settings):
        (isolated_settings / ENV_FILE_NAME).write_text("TREEDIST_ALGORITHM=dynamic\n")
        assert load_settings().algorithm == "dynamic"

    def test_env_file_in_home(self, isolated_settings):
        (isolated_settings / "home" / ENV_FILE_NAME).write_text("TREEDIST_OUTPUT_FORMAT=json\n")
        assert load_settings().output_format == "json"

    def test_environment_wins_over_file(self, isolated_settings, monkeypatch):
        (isolated_settings / ENV_FILE_NAME).write_text("TREEDIST_ALGORITHM=dynamic\n")
        monkeypatch.setenv("TREEDIST_ALGORITHM", "brute")
        assert load_settings().algorithm == "brute"

    def test_explicit_file(self, tmp_path):
        path = tmp_path / "custom.env"
        path.write_text("TREEDIST_DEFAULT_LENGTH=0.5\n")
        assert load_settings(path).default_length == 0.5

    def test_missing_explicit_file(self, tmp_path):
        with pytest.raises(SettingsError):
            load_settings(tmp_path / "missing.env")

    @pytest.mark.parametrize(
        "variable, value",
        [
            ("TREEDIST_CHAIN_CAP", "abc"),
            ("TREEDIST_CHAIN_CAP", "0"),
            ("TREEDIST_ALGORITHM", "fastest"),
            ("TREEDIST_WORKERS", "-2"),
            ("TREEDIST_LOG_LEVEL", "LOUD"),
        ],
    )
    def test_invalid_value_names_variable(self, monkeypatch, variable, value):
        monkeypatch.setenv(variable, value)
        with pytest.raises(SettingsError) as excinfo:
            load_settings()
        assert variable in str(excinfo.value)
        assert excinfo.value.exit_code == 5

    def test_log_level_upper_cased(self, monkeypatch):
        monkeypatch.setenv("TREEDIST_LOG_LEVEL", "debug")
        assert load_settings().log_level == "DEBUG"


class TestGetSettings:
    """Process-wide cache"""

    def test_cached(self, monkeypatch):
        first = get_settings()
        monkeypatch.setenv("TREEDIST_ALGORITHM", "brute")
        assert get_settings() is first
        reset_settings()
        assert get_settings().algorithm == "brute"
