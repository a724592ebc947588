"""Tests for configuration module."""

from pathlib import Path

import pytest

from polishforge.config import (
    DEFAULT_BUDGET,
    DEFAULT_DATA_DIR,
    DEFAULT_DIM_CAP,
    DEFAULT_ISOLATION_WINDOW,
    DEFAULT_MERGE_CAP,
    DEFAULT_SPHERE_DIM_CAP,
    DEFAULT_THREADS,
    Settings,
)
from polishforge.errors import ConfigError


def test_settings_defaults() -> None:
    """Test that Settings has correct default values."""
    settings = Settings()

    assert settings.data_dir == Path(DEFAULT_DATA_DIR)
    assert settings.budget == DEFAULT_BUDGET
    assert settings.dim_cap == DEFAULT_DIM_CAP
    assert settings.merge_cap == DEFAULT_MERGE_CAP
    assert settings.isolation_window == DEFAULT_ISOLATION_WINDOW
    assert settings.sphere_dim_cap == DEFAULT_SPHERE_DIM_CAP
    assert settings.threads == DEFAULT_THREADS


def test_settings_from_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that Settings loads from environment variables."""
    monkeypatch.setenv("POLISH_FORGE_DATA_DIR", "/custom/data")
    monkeypatch.setenv("POLISH_FORGE_BUDGET", "14")
    monkeypatch.setenv("POLISH_FORGE_DIM_CAP", "2")
    monkeypatch.setenv("POLISH_FORGE_MERGE_CAP", "5")
    monkeypatch.setenv("POLISH_FORGE_ISOLATION_WINDOW", "4")
    monkeypatch.setenv("POLISH_FORGE_SPHERE_DIM_CAP", "3")
    monkeypatch.setenv("POLISH_FORGE_THREADS", "8")

    settings = Settings()

    assert settings.data_dir == Path("/custom/data")
    assert settings.budget == 14
    assert settings.dim_cap == 2
    assert settings.merge_cap == 5
    assert settings.isolation_window == 4
    assert settings.sphere_dim_cap == 3
    assert settings.threads == 8


def test_settings_rejects_non_integer(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that a non-integer budget raises ConfigError."""
    monkeypatch.setenv("POLISH_FORGE_BUDGET", "ten")

    with pytest.raises(ConfigError, match="POLISH_FORGE_BUDGET"):
        Settings()


def test_settings_validate(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that validate rejects a non-positive cap."""
    Settings().validate()
    monkeypatch.setenv("POLISH_FORGE_MERGE_CAP", "0")

    with pytest.raises(ConfigError, match="merge_cap"):
        Settings().validate()


def test_settings_derived_paths() -> None:
    """Test that derived path methods work correctly."""
    settings = Settings()

    assert settings.stream_path("s1") == Path(DEFAULT_DATA_DIR) / "s1.jsonl"
    assert settings.report_path("s1") == Path(DEFAULT_DATA_DIR) / "s1_report.json"
    assert settings.tree_path("cantor") == Path(DEFAULT_DATA_DIR) / "cantor_tree.json"
