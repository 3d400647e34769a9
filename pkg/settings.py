import os
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional

import psutil
import toml

from errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "config.toml"
CONFIG_PATH_ENV = "BERNOULLI_TV_CONFIG"
ENUM_LIMIT_ENV = "BERNOULLI_TV_ENUM_LIMIT"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def default_worker_count() -> int:
    """Number of logical CPUs, never less than 1"""
    return psutil.cpu_count(logical=True) or 1


@dataclass(frozen=True)
class Settings:
    enumeration_limit: int = 26
    chunk_bits: int = 16
    enumeration_workers: int = 0
    tolerance: float = 1e-12
    verify_workers: int = 1
    log_level: str = "INFO"
    log_format: str = LOG_FORMAT

    @property
    def workers(self) -> int:
        """Resolved worker count for the atom traversal"""
        if self.enumeration_workers > 0:
            return self.enumeration_workers
        return default_worker_count()

    def with_overrides(self, **changes: Any) -> "Settings":
        """Copy with the given non-None fields replaced"""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def _read_int(value: Any, name: str, minimum: int) -> int:
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, float) and not value.is_integer():
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if number < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {number}")
    return number


def _from_mapping(data: Dict[str, Any]) -> Settings:
    enumeration = data.get("enumeration", {})
    verify = data.get("verify", {})
    log_section = data.get("logging", {})
    defaults = Settings()
    try:
        tolerance = float(verify.get("tolerance", defaults.tolerance))
    except (TypeError, ValueError):
        raise ConfigurationError(f"verify.tolerance must be a number, got {verify.get('tolerance')!r}")
    if tolerance < 0:
        raise ConfigurationError("verify.tolerance must be non-negative")
    return Settings(
        enumeration_limit=_read_int(enumeration.get("limit", defaults.enumeration_limit), "enumeration.limit", 1),
        chunk_bits=_read_int(enumeration.get("chunk_bits", defaults.chunk_bits), "enumeration.chunk_bits", 1),
        enumeration_workers=_read_int(enumeration.get("workers", defaults.enumeration_workers), "enumeration.workers", 0),
        tolerance=tolerance,
        verify_workers=_read_int(verify.get("workers", defaults.verify_workers), "verify.workers", 1),
        log_level=str(log_section.get("level", defaults.log_level)).upper(),
        log_format=str(log_section.get("format", defaults.log_format)),
    )


def load_settings(path: Optional[str] = None) -> Settings:
    """Load settings from a TOML file, then apply environment overrides.

    Args:
        path: Explicit config file. When omitted, BERNOULLI_TV_CONFIG is consulted,
              then config.toml in the working directory. A missing default file
              is not an error; a missing explicit file is.

    Returns:
        Settings instance
    """
    explicit = path or os.environ.get(CONFIG_PATH_ENV)
    config_path = explicit or DEFAULT_CONFIG_FILE

    data: Dict[str, Any] = {}
    if os.path.exists(config_path):
        try:
            data = toml.load(config_path)
            logger.debug(f"Loaded settings from {config_path}")
        except (toml.TomlDecodeError, OSError) as e:
            logger.error(f"Error reading config file {config_path}: {str(e)}")
            raise ConfigurationError(f"cannot read {config_path}: {e}")
    elif explicit:
        raise ConfigurationError(f"config file not found: {config_path}")

    settings = _from_mapping(data)

    override = os.environ.get(ENUM_LIMIT_ENV)
    if override is not None and override.strip():
        limit = _read_int(override.strip(), ENUM_LIMIT_ENV, 1)
        logger.info(f"Enumeration limit overridden by {ENUM_LIMIT_ENV}: {limit}")
        settings = replace(settings, enumeration_limit=limit)

    return settings


_active: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, loaded on first use"""
    global _active
    if _active is None:
        _active = load_settings()
    return _active


def use_settings(settings: Optional[Settings]) -> None:
    """Install settings for the rest of the process; None reloads on next use"""
    global _active
    _active = settings
