"""
Runtime settings loaded from the environment (prefix BIVQFT_) or a .env file
"""

from functools import lru_cache

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="BIVQFT_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    seed: int = Field(0, ge=0, description="Default RNG seed for synthesis and noise")
    log_level: str = Field("INFO", description="structlog filtering level")
    log_json: bool = Field(False, description="Render log events as JSON lines")
    oversample: float = Field(10.0, ge=1.0, description="Default M/N ratio for synthesis")
    realizations: int = Field(1, ge=1, description="Default realization count")
    float_format: str = Field("%.17g", description="printf format for CSV floats")

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level


@lru_cache
def get_settings() -> Settings:
    return Settings()
