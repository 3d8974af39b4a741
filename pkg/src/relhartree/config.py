"""Runtime settings with environment loading."""

import os
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

CODE_VERSION = "0.1.0"
ENV_PREFIX = "RELHARTREE_"

# field name -> environment suffix
_ENV_KEYS = {
    "log_level": "LOG_LEVEL",
    "cache_dir": "CACHE_DIR",
    "max_workers": "MAX_WORKERS",
    "code_version": "CODE_VERSION",
}


def _default_cache_dir() -> Path:
    return Path.home() / ".cache" / "relhartree"


class RuntimeSettings(BaseModel):
    """Process-wide settings that are not part of a run's physics.

    A ``.env`` file is honoured when the command-line entry point starts.

    Example:
        settings = RuntimeSettings.from_env()
        print(settings.cache_dir, settings.max_workers)
    """

    log_level: str = Field(default="INFO", description="Log level name")
    cache_dir: Path = Field(
        default_factory=_default_cache_dir,
        description="Directory of cached limit ground states",
    )
    max_workers: int = Field(default=1, ge=1, description="Default worker count for sweeps")
    code_version: str = Field(
        default=CODE_VERSION,
        description="Version string stamped into profiles and cache keys",
    )

    @field_validator("log_level")
    @classmethod
    def _upper(cls, value: str) -> str:
        return value.strip().upper()

    @field_validator("cache_dir")
    @classmethod
    def _expand(cls, value: Path) -> Path:
        return value.expanduser()

    @classmethod
    def from_env(cls, prefix: str = ENV_PREFIX) -> "RuntimeSettings":
        """Build settings from ``{prefix}LOG_LEVEL``, ``CACHE_DIR``, ``MAX_WORKERS``
        and ``CODE_VERSION``; unset or empty variables keep the defaults.

        Raises:
            pydantic.ValidationError: a variable does not parse (e.g. MAX_WORKERS=0)
        """
        found = {
            name: os.environ.get(f"{prefix}{suffix}", "")
            for name, suffix in _ENV_KEYS.items()
        }
        return cls.model_validate({name: value for name, value in found.items() if value})
