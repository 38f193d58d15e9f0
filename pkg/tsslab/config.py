"""Environment-driven settings for tsslab."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field


class Settings(BaseModel):
    """Process-wide settings read from the environment."""

    cache_dir: Optional[Path] = Field(None, description="Directory for cached PPR matrices (TSS_CACHE_DIR)")
    dense_threshold: int = Field(4000, ge=1, description="Largest n solved by dense factorisation")
    oracle_threshold: int = Field(500, ge=1, description="Largest n accepted by shortest-path oracles")
    workers: int = Field(1, ge=1, description="Default worker count for parallel phases")
    log_level: str = Field("INFO", description="Log level name")
    log_format: Literal["console", "json"] = Field("console", description="Log renderer")

    @classmethod
    def from_env(cls) -> "Settings":
        """Build settings from environment variables."""
        cache_dir = os.environ.get("TSS_CACHE_DIR")
        return cls(
            cache_dir=Path(cache_dir) if cache_dir else None,
            dense_threshold=int(os.environ.get("TSS_DENSE_THRESHOLD", 4000)),
            oracle_threshold=int(os.environ.get("TSS_ORACLE_THRESHOLD", 500)),
            workers=int(os.environ.get("TSS_WORKERS", 1)),
            log_level=os.environ.get("LOG_LEVEL", "INFO"),
            log_format=os.environ.get("LOG_FORMAT", "console"),
        )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return cached settings."""
    return Settings.from_env()
