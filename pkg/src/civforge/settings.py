"""Process settings using Pydantic Settings."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Settings loaded from CIVFORGE_* environment variables."""

    # Upper bound on benchmark worker processes
    threads: int = Field(default=1, ge=1)

    log_level: str = "INFO"

    # tqdm progress bars
    progress: bool = True

    model_config = SettingsConfigDict(
        env_prefix="CIVFORGE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
