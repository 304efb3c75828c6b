"""
Helper utilities shared across sepkit packages.

Provides:
- Settings loading (TOML, cached, deep-merged over defaults)
- Structured config loading (JSON or TOML by suffix) with usage errors
- Atomic file writes and locale-independent CSV output
"""

import csv
import io
import json
import os
from pathlib import Path
from typing import Any

import toml
from loguru import logger

from utils.errors import UsageError

# -- Settings cache --
_settings_cache = None
_settings_path_override: Path | None = None

DEFAULT_SETTINGS: dict[str, Any] = {
    "kernel": {
        "tol_psd": 1e-10,
        "jitter_scale": 1e-10,
        "condition_limit": 1e12,
    },
    "spectral": {
        "nodes": 64,
        "tol_eig": 1e-12,
        "truncation": 8,
    },
    "second_order": {
        "tol": 5.0,
        "budget": 100_000,
        "min_diagnostic_samples": 1000,
    },
    "emulator": {
        "jitter_scale": 1e-10,
    },
    "design": {
        "maximin_candidates": 20,
    },
    "experiment": {
        "length_scale": 2.0,
        "truncation": 8,
        "test_set_size": 500,
        "replicates": 30,
        "regression_variance": 1.0,
    },
    "parallel": {
        "n_jobs": 1,
    },
}


def load_settings() -> dict[str, Any]:
    """
    Load numeric settings from TOML file (cached after first load).

    Returns:
        Dictionary containing settings with defaults applied
    """
    global _settings_cache
    if _settings_cache is not None:
        return _settings_cache

    settings_path = _settings_path_override or Path(__file__).parent.parent / "data" / "settings.toml"

    if settings_path.exists():
        try:
            loaded = toml.load(settings_path)
            _settings_cache = _deep_merge(DEFAULT_SETTINGS, loaded)
        except Exception as e:
            logger.warning(f"Could not load settings from {settings_path}: {e}, using defaults")
            _settings_cache = _deep_merge(DEFAULT_SETTINGS, {})
    else:
        logger.info(f"Settings file not found at {settings_path}, using defaults")
        _settings_cache = _deep_merge(DEFAULT_SETTINGS, {})
    return _settings_cache


def reset_settings_cache(path: Path | None = None) -> None:
    """Drop cached settings; the next load reads `path` (or the bundled file)."""
    global _settings_cache, _settings_path_override
    _settings_cache = None
    _settings_path_override = Path(path) if path is not None else None


def setting(section: str, key: str) -> Any:
    """Shorthand for load_settings()[section][key]."""
    return load_settings()[section][key]


def _deep_merge(base: dict, override: dict) -> dict:
    """
    Deep merge two dictionaries.

    Args:
        base: Base dictionary with defaults
        override: Dictionary with overrides

    Returns:
        Merged dictionary (override takes precedence, base untouched)
    """
    result = {k: (dict(v) if isinstance(v, dict) else v) for k, v in base.items()}

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _deep_merge(result[key], value)
        else:
            result[key] = value

    return result


def load_config(path: str | Path) -> dict[str, Any]:
    """
    Load a structured run configuration from JSON (or TOML by suffix).

    Raises:
        UsageError: file missing, or malformed (JSON errors carry line/column)
    """
    path = Path(path)
    if not path.exists():
        raise UsageError(f"Config file not found: {path}")

    text = path.read_text()
    if path.suffix == ".toml":
        try:
            return toml.loads(text)
        except toml.TomlDecodeError as e:
            raise UsageError(f"Malformed TOML in {path}: {e}") from e

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"Malformed JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise UsageError(f"Config in {path} must be a JSON object")
    return data


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write text via tmp file + rename so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    tmp_path.write_text(text)
    os.replace(str(tmp_path), str(path))
    return path


def format_float(value: float) -> str:
    """Locale-independent shortest round-trip decimal ('.' separator)."""
    return repr(float(value))


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    """
    Write rows to CSV with '.' decimals regardless of locale.

    Floats are written with repr() so identical inputs give byte-identical files.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return atomic_write_text(path, buffer.getvalue())


def write_json(path: str | Path, data: Any) -> Path:
    """Write JSON (sorted keys, indented) atomically."""
    return atomic_write_text(path, json.dumps(data, indent=2, sort_keys=True) + "\n")
