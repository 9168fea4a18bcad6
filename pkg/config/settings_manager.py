"""
Settings management class
- Save/load run defaults in JSON format
- CLI flags override stored values, stored values override defaults
"""
from __future__ import annotations
import json
import logging
from pathlib import Path
from dataclasses import dataclass, asdict, fields
from typing import Any, Dict, Optional

try:
    from utils.system import get_app_data_dir
except ImportError:
    from ..utils.system import get_app_data_dir
from .defaults import (
    SETTINGS_FILENAME,
    DEFAULT_SEED,
    DEFAULT_N_PATHS,
    DEFAULT_WORKERS,
    DEFAULT_TAIL_TOL,
    DEFAULT_OUTPUT_FORMAT,
    OUTPUT_FORMATS,
)

logger = logging.getLogger(__name__)

@dataclass
class Settings:
    """Run defaults shared by every subcommand"""
    seed: int = DEFAULT_SEED
    n_paths: int = DEFAULT_N_PATHS
    worker_count: int = DEFAULT_WORKERS
    tail_tol: float = DEFAULT_TAIL_TOL
    extended_precision: bool = True
    output_format: str = DEFAULT_OUTPUT_FORMAT

    def is_valid(self) -> bool:
        """Check if settings are within their allowed ranges"""
        return (
            0 <= self.seed < 2**64
            and self.n_paths >= 1
            and self.worker_count >= 1
            and 0.0 < self.tail_tol < 1.0
            and self.output_format in OUTPUT_FORMATS
        )

    def merged(self, **overrides: Any) -> "Settings":
        """Return a copy with non-None overrides applied"""
        data = asdict(self)
        for key, value in overrides.items():
            if key in data and value is not None:
                data[key] = value
        return Settings(**data)


def _coerce(name: str, raw: str) -> Any:
    """Convert a 'key=value' string to the type of the matching field"""
    kinds = {f.name: f.type for f in fields(Settings)}
    if name not in kinds:
        raise KeyError(f"Unknown setting: {name}")
    kind = kinds[name]
    if kind in ("bool", bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if kind in ("int", int):
        return int(raw)
    if kind in ("float", float):
        return float(raw)
    return raw


class SettingsManager:
    """Manages settings reading and writing"""

    def __init__(self, settings_path: Optional[Path] = None):
        self._settings_path = settings_path or get_app_data_dir() / SETTINGS_FILENAME
        self._settings: Settings = Settings()
        self._load()

        if not self._settings.is_valid():
            logger.warning(f"Stored settings out of range, using defaults: {self._settings_path}")
            self._settings = Settings()

    @property
    def settings(self) -> Settings:
        return self._settings

    @property
    def path(self) -> Path:
        return self._settings_path

    def update(self, **kwargs) -> None:
        """Update settings and save"""
        for key, value in kwargs.items():
            if hasattr(self._settings, key):
                setattr(self._settings, key, value)
            else:
                logger.warning(f"Ignoring unknown setting: {key}")
        self._save()

    def update_from_strings(self, assignments: Dict[str, str]) -> None:
        """Apply 'key=value' pairs given on the command line"""
        self.update(**{key: _coerce(key, raw) for key, raw in assignments.items()})

    def _load(self) -> None:
        """Load settings from file"""
        if self._settings_path.exists():
            try:
                with open(self._settings_path, 'r', encoding='utf-8') as f:
                    data = json.load(f)
                    self._settings = Settings(**data)
            except (json.JSONDecodeError, TypeError):
                logger.warning(f"Ignoring unreadable settings file: {self._settings_path}")
                self._settings = Settings()

    def _save(self) -> None:
        """Save settings to file"""
        try:
            with open(self._settings_path, 'w', encoding='utf-8') as f:
                json.dump(asdict(self._settings), f, indent=2, ensure_ascii=False)
        except (IOError, OSError) as e:
            logger.error(f"Failed to save settings: {e}")
