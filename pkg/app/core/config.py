"""Application configuration settings."""

from functools import lru_cache
from typing import Annotated, Any

from pydantic import field_validator
from pydantic_settings import BaseSettings, NoDecode, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="COVCRAFT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "covcraft"
    APP_VERSION: str = "0.1.0"
    DEBUG: bool = False
    API_V1_PREFIX: str = "/api/v1"
    LOG_LEVEL: str = "INFO"

    # Server
    HOST: str = "0.0.0.0"
    PORT: int = 8000
    WORKERS: int = 1

    # CORS
    CORS_ORIGINS: Annotated[list[str], NoDecode] = ["*"]
    CORS_ALLOW_CREDENTIALS: bool = True
    CORS_ALLOW_METHODS: Annotated[list[str], NoDecode] = ["*"]
    CORS_ALLOW_HEADERS: Annotated[list[str], NoDecode] = ["*"]

    # Parallelism (0 = one worker per CPU)
    THREADS: int = 0

    # Backtest protocol
    TRAIN_LEN: int = 200
    REBALANCE_EVERY: Annotated[list[int], NoDecode] = [30, 60, 90]
    ANNUAL_RETURN_TARGET: float = 0.10

    # Tuning grids
    GRID_STEP: float = 0.02
    VALIDATION_FRACTION: float = 0.25
    RHO_STEP: float = 0.05

    # Minimum-variance solver
    QP_TOLERANCE: float = 1e-8
    QP_MAX_ITERATIONS: int = 50_000
    QP_RESTART_EVERY: int = 500

    # Synthetic data
    DEFAULT_SEED: int = 0

    @field_validator(
        "CORS_ORIGINS", "CORS_ALLOW_METHODS", "CORS_ALLOW_HEADERS", mode="before"
    )
    @classmethod
    def parse_str_list(cls, v: Any) -> list[str]:
        if isinstance(v, str):
            return [item.strip() for item in v.split(",")]
        return v

    @field_validator("REBALANCE_EVERY", mode="before")
    @classmethod
    def parse_int_list(cls, v: Any) -> list[int]:
        if isinstance(v, str):
            return [int(item) for item in v.split(",") if item.strip()]
        return v

    @field_validator("THREADS")
    @classmethod
    def check_threads(cls, v: int) -> int:
        if v < 0:
            raise ValueError("THREADS must be >= 0")
        return v

    def provenance(self) -> dict[str, Any]:
        """Numerical defaults embedded in every report."""
        return {
            "train_len": self.TRAIN_LEN,
            "rebalance_every": list(self.REBALANCE_EVERY),
            "annual_return_target": self.ANNUAL_RETURN_TARGET,
            "grid_step": self.GRID_STEP,
            "validation_fraction": self.VALIDATION_FRACTION,
            "rho_step": self.RHO_STEP,
            "qp_tolerance": self.QP_TOLERANCE,
            "qp_max_iterations": self.QP_MAX_ITERATIONS,
            "qp_restart_every": self.QP_RESTART_EVERY,
        }


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()
