"""Engine configuration using Pydantic Settings."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

# Repository root (parent of cga_invariants/)
ROOT_DIR = Path(__file__).parent.parent
ENV_FILE = ROOT_DIR / ".env"


class Settings(BaseSettings):
    """Engine settings loaded from CGA_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="CGA_",
        env_file=str(ENV_FILE),
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "cga-invariants"
    app_version: str = "0.1.0"
    report_schema_version: str = "1.0"

    # Logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"

    # Output
    default_format: Literal["text", "latex", "json"] = "text"

    # Workers (0 = one per CPU)
    parallelism: int = 1

    # Bench
    bench_memory_limit_mb: int = 0  # 0 = unlimited

    # Path enumeration grows factorially; the oracle is refused above this 2*ell
    path_oracle_max_twice_ell: int = 9


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
