"""Configuration settings via environment variables."""

import os
from dataclasses import dataclass
from pathlib import Path

from polishforge.errors import ConfigError

# Default values - used by Settings and tests
DEFAULT_DATA_DIR = "./data"
DEFAULT_BUDGET = 10
DEFAULT_DIM_CAP = 4
DEFAULT_MERGE_CAP = 3
DEFAULT_ISOLATION_WINDOW = 3
DEFAULT_SPHERE_DIM_CAP = 6
DEFAULT_THREADS = 1


@dataclass
class Settings:
    """Run settings loaded from environment variables."""

    data_dir: Path
    budget: int
    dim_cap: int
    merge_cap: int
    isolation_window: int
    sphere_dim_cap: int
    threads: int

    def __init__(self) -> None:
        """Initialize settings from environment variables with defaults."""
        self.data_dir = Path(os.environ.get("POLISH_FORGE_DATA_DIR", DEFAULT_DATA_DIR))
        self.budget = _int_env("POLISH_FORGE_BUDGET", DEFAULT_BUDGET)
        self.dim_cap = _int_env("POLISH_FORGE_DIM_CAP", DEFAULT_DIM_CAP)
        self.merge_cap = _int_env("POLISH_FORGE_MERGE_CAP", DEFAULT_MERGE_CAP)
        self.isolation_window = _int_env("POLISH_FORGE_ISOLATION_WINDOW", DEFAULT_ISOLATION_WINDOW)
        self.sphere_dim_cap = _int_env("POLISH_FORGE_SPHERE_DIM_CAP", DEFAULT_SPHERE_DIM_CAP)
        self.threads = _int_env("POLISH_FORGE_THREADS", DEFAULT_THREADS)

    def validate(self) -> None:
        """Raise ConfigError when a budget or cap is not positive."""
        for name in (
            "budget",
            "dim_cap",
            "merge_cap",
            "isolation_window",
            "sphere_dim_cap",
            "threads",
        ):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"{name} must be positive, got {value}")

    def stream_path(self, name: str) -> Path:
        """Path to a JSON-lines presentation stream."""
        return self.data_dir / f"{name}.jsonl"

    def report_path(self, name: str) -> Path:
        """Path to a JSON run report."""
        return self.data_dir / f"{name}_report.json"

    def tree_path(self, name: str) -> Path:
        """Path to a JSON pruned-tree file."""
        return self.data_dir / f"{name}_tree.json"


def _int_env(name: str, default: int) -> int:
    raw = os.environ.get(name, str(default))
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from exc
