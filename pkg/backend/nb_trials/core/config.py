"""Application configuration and environment variable validation."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Centralised settings loaded from the environment."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Quadrature defaults for the information integrals
    quad_abs_tol: float = Field(default=1e-10, gt=0, alias="NB_QUAD_ABS_TOL")
    quad_rel_tol: float = Field(default=1e-10, ge=0, alias="NB_QUAD_REL_TOL")
    quad_max_subdivisions: int = Field(default=200, ge=1, alias="NB_QUAD_MAX_SUBDIVISIONS")

    # Sizing
    equiv_bisect_tol: float = Field(default=1e-5, gt=0, alias="NB_EQUIV_BISECT_TOL")
    default_alpha: float = Field(default=0.05, gt=0, lt=1, alias="NB_DEFAULT_ALPHA")
    default_power: float = Field(default=0.8, gt=0, lt=1, alias="NB_DEFAULT_POWER")
    rounding: str = Field(default="total", alias="NB_ROUNDING")
    zhu_max_steps: int = Field(default=1_000_000, ge=1, alias="NB_ZHU_MAX_STEPS")

    # NB maximum likelihood fitter
    fit_grad_tol: float = Field(default=1e-8, gt=0, alias="NB_FIT_GRAD_TOL")
    fit_max_iterations: int = Field(default=200, ge=1, alias="NB_FIT_MAX_ITERATIONS")
    kappa_floor: float = Field(default=1e-6, gt=0, alias="NB_KAPPA_FLOOR")

    # Monte Carlo
    sim_replications: int = Field(default=10_000, ge=1, alias="NB_SIM_REPLICATIONS")
    sim_seed: int = Field(default=20170823, alias="NB_SIM_SEED")
    sim_workers: int = Field(default=1, ge=1, alias="NB_SIM_WORKERS")
    sim_chunk_size: int = Field(default=250, ge=1, alias="NB_SIM_CHUNK_SIZE")

    # Output locations used by the scripts
    tables_dir: Path = Field(default=Path("data/tables"), alias="NB_TABLES_DIR")
    paper_tables_dir: Path = Field(default=Path("data/paper_tables"), alias="NB_PAPER_TABLES_DIR")

    # Logfire Configuration (for tracing)
    logfire_api_key: Optional[str] = Field(None, alias="NB_LOGFIRE_TOKEN")

    # Environment
    environment: str = Field(default="development", alias="ENVIRONMENT")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return a cached ``Settings`` instance."""

    return Settings()  # type: ignore[call-arg]


settings = get_settings()
