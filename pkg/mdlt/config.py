"""
Configuration management for the Laplace toolkit.
"""

from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables (prefix MDLT_)."""

    # Parallelism
    threads: int = Field(
        default=1,
        ge=1,
        description="Maximum worker threads for chunked grid evaluation"
    )
    chunk_size: int = Field(
        default=262144,
        ge=1024,
        description="Maximum number of grid points evaluated per chunk"
    )

    # Numerics
    default_rel_tol: float = Field(
        default=1e-8,
        gt=0,
        description="Default relative tolerance for quadrature"
    )
    series_rel_tol: float = Field(
        default=1e-12,
        gt=0,
        description="Default relative tolerance for special-function series"
    )
    series_max_terms: int = Field(
        default=5000,
        ge=1,
        description="Default term cap for special-function series"
    )
    strict_decay: bool = Field(
        default=False,
        description="Raise instead of warning when a resolvent fails the decay check"
    )

    # Output
    results_path: str = Field(
        default="./results",
        description="Default directory for result tables"
    )

    # Logging
    log_level: str = Field(default="INFO", description="Log level")
    log_file: Optional[str] = Field(default=None, description="Log file path")

    class Config:
        env_prefix = "MDLT_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False


# Global settings instance
settings = Settings()


def setup_runtime_environment():
    """Prepare directories the CLI writes into."""
    Path(settings.results_path).mkdir(parents=True, exist_ok=True)
