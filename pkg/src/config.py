"""
Configuration loading for the hyperset workbench.

Loads non-secret settings (resource limits, totality defaults) from
workbench.yaml, secrets from environment variables.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, Field, field_validator

from src.errors import WorkbenchError
from src.totality import check_strategy

DEFAULT_CONFIG_PATH = "workbench.yaml"


class AppConfig(BaseModel):
    """Application configuration. Secrets come from env vars, rest from YAML."""

    # Secrets (from environment only)
    api_key: Optional[str] = None

    # Resource limits
    max_universe_k: int = Field(default=4, ge=1, le=6)
    max_pool_size: int = Field(default=200_000, ge=1)

    # Totality defaults
    default_budget: int = Field(default=16, ge=1)
    default_strategies: list[str] = Field(default_factory=lambda: ["bare", "singleton"])

    # Cache settings
    universe_cache_ttl: int = Field(default=600, ge=1)

    log_level: str = "info"

    @field_validator("default_strategies")
    @classmethod
    def validate_strategies(cls, value: list[str]) -> list[str]:
        for name in value:
            try:
                check_strategy(name)
            except WorkbenchError as exc:
                raise ValueError(str(exc)) from exc
        return value

    @field_validator("log_level")
    @classmethod
    def normalize_log_level(cls, value: str) -> str:
        return value.lower()


def load_config(config_path: str | None = None) -> AppConfig:
    """
    Load configuration from YAML file + environment variables.

    Args:
        config_path: Path to workbench.yaml. If None, reads CONFIG_PATH env
                     var (default: workbench.yaml in current directory); a
                     missing implicit file means built-in defaults.

    Returns:
        Validated AppConfig instance.
    """
    explicit = config_path is not None
    if config_path is None:
        config_path = os.environ.get("CONFIG_PATH", DEFAULT_CONFIG_PATH)

    path = Path(config_path)
    raw: dict | None = None
    if path.exists():
        with open(path) as f:
            raw = yaml.safe_load(f)
    elif explicit:
        raise FileNotFoundError(f"Config file not found: {config_path}")

    if raw is None:
        raw = {}

    # Inject secrets from environment (never from YAML)
    config_data = {**raw, "api_key": os.environ.get("API_KEY")}
    if "LOG_LEVEL" in os.environ:
        config_data["log_level"] = os.environ["LOG_LEVEL"]

    return AppConfig(**config_data)
