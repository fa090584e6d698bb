"""
Configuration management using Pydantic Settings V2
"""

import logging
from pathlib import Path
from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit-wide settings; per-run parameters live in ExperimentConfig instead"""

    ENVIRONMENT: str = "dev"  # dev, stage, prod

    # Logging Configuration
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None  # file handler only when set
    LOG_TIMESTAMP: str = "utc"  # utc | ir | both
    LOG_COLOR: str = "auto"  # auto | true | false
    LOG_TIMESTAMP_PRECISION: int = 3  # 3=ms, 6=μs
    NO_COLOR: str = "0"  # 1=force disable colors

    # Decoding guards and defaults
    DEFAULT_LIST_SIZE: int = 1
    ESD_MAX_K: int = 24  # exhaustive search refuses larger dimensions
    GND_MAX_QUERIES: int = 1_000_000  # default l_max for the noise-guessing baseline
    EXACT_D_MAX_K: int = 30  # exact rank counting needs a cap beyond this
    GENIE_MAX_QUERIES: int = 100_000  # cap for genie query estimates
    RANDOM_CODE_MAX_RETRIES: int = 1000

    # Saddlepoint root finding
    SADDLEPOINT_ROOT_TOL: float = 1e-10  # relative to sum |r_i|
    SADDLEPOINT_MAX_EXPANSIONS: int = 200

    # Simulation
    DEFAULT_SEED: int = 2024
    TARGET_ERRORS: int = 100
    MAX_FRAMES: int = 1_000_000
    PROGRESS_EVERY: int = 10_000  # frames between progress log lines

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept only standard logging level names"""
        level = v.upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown LOG_LEVEL: {v}")
        return level

    @field_validator("LOG_TIMESTAMP")
    @classmethod
    def validate_timestamp_mode(cls, v: str) -> str:
        if v.lower() not in ("utc", "ir", "both"):
            raise ValueError("LOG_TIMESTAMP must be one of utc, ir, both")
        return v.lower()

    @field_validator("LOG_COLOR")
    @classmethod
    def validate_color_mode(cls, v: str) -> str:
        if v.lower() not in ("auto", "true", "false"):
            raise ValueError("LOG_COLOR must be one of auto, true, false")
        return v.lower()

    @field_validator("LOG_FILE")
    @classmethod
    def create_log_directory(cls, v: Optional[str]) -> Optional[str]:
        """Ensure log directory exists"""
        if v:
            Path(v).parent.mkdir(parents=True, exist_ok=True)
        return v

    @field_validator(
        "DEFAULT_LIST_SIZE",
        "ESD_MAX_K",
        "GND_MAX_QUERIES",
        "EXACT_D_MAX_K",
        "GENIE_MAX_QUERIES",
        "RANDOM_CODE_MAX_RETRIES",
        "SADDLEPOINT_MAX_EXPANSIONS",
        "TARGET_ERRORS",
        "MAX_FRAMES",
        "PROGRESS_EVERY",
    )
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be a positive integer")
        return v

    @property
    def is_production(self) -> bool:
        """Check if running in production environment"""
        return self.ENVIRONMENT.lower() in ("prod", "production")


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get settings instance"""
    return settings
