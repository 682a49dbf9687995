"""Application configuration: file values, CLI overrides, built-in defaults.

Precedence is CLI flag > config file > default. The resolved config is
echoed into each experiment directory so a run's exact knobs are always
recoverable from its outputs.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError

DEFAULT_GLOBAL_CAP = 15
DEFAULT_GLOBAL_CAP_HUMAN = 25


@dataclass
class AppConfig:
    base_url: str = "http://localhost:8000/v1"
    model: str = "scripted"
    api_key_env: str = "CFNLOOP_API_KEY"
    temperature: float = 0.0
    max_output_tokens: int = 8000
    general_attempts: int = 2
    detailed_attempts: int = 4
    human_attempts: int = 4
    global_cap: int = DEFAULT_GLOBAL_CAP
    global_cap_human: int = DEFAULT_GLOBAL_CAP_HUMAN
    workers: int = 1
    history_mode: str = "full"
    human_mode: str = "off"
    env_config: str | None = None
    manifest: str | None = None
    script: str | None = None
    out_dir: str = "experiments"

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {
    "base_url": str,
    "model": str,
    "api_key_env": str,
    "temperature": float,
    "max_output_tokens": int,
    "general_attempts": int,
    "detailed_attempts": int,
    "human_attempts": int,
    "global_cap": int,
    "global_cap_human": int,
    "workers": int,
    "history_mode": str,
    "human_mode": str,
    "env_config": str,
    "manifest": str,
    "script": str,
    "out_dir": str,
}


def load_config(path: str | Path | None = None, cli_overrides: dict | None = None) -> AppConfig:
    """Merge defaults, the optional config file, and CLI overrides."""
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError([f"config file not found: {path}"])
        try:
            raw = yaml.safe_load(path.read_text()) or {}
        except yaml.YAMLError as exc:
            raise ConfigError([f"config file is not valid YAML: {exc}"]) from exc
        if not isinstance(raw, dict):
            raise ConfigError([f"config file {path} must contain a mapping"])
        values.update(raw)

    for key, value in (cli_overrides or {}).items():
        if value is not None:
            values[key] = value

    config = AppConfig()
    problems: list[str] = []
    for key, value in values.items():
        if key not in _FIELD_TYPES:
            problems.append(f"unknown config field '{key}'")
            continue
        try:
            setattr(config, key, _FIELD_TYPES[key](value))
        except (TypeError, ValueError):
            problems.append(f"field '{key}' has invalid value {value!r}")

    if config.workers < 1:
        problems.append("workers must be >= 1")
    if config.history_mode not in ("full", "last-error-only"):
        problems.append(f"history_mode must be full or last-error-only, got {config.history_mode!r}")
    if config.human_mode not in ("off", "tty", "serve"):
        problems.append(f"human_mode must be off, tty, or serve, got {config.human_mode!r}")
    for file_field in ("env_config", "manifest", "script"):
        value = getattr(config, file_field)
        if value is not None and not Path(value).exists():
            problems.append(f"{file_field} file not found: {value}")

    if problems:
        raise ConfigError(problems)
    return config


def echo_config(config: AppConfig, out_dir: str | Path) -> Path:
    """Write the resolved configuration into the experiment directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "config.yaml"
    target.write_text(yaml.safe_dump(config.to_dict(), sort_keys=True))
    return target
