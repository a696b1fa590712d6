"""3D Pendulum Optimal Control - Configuration"""
from pathlib import Path
from typing import Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings loaded from PENDULUM_* environment variables or .env."""

    model_config = SettingsConfigDict(
        env_prefix="PENDULUM_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Directories
    output_dir: str = "./runs"
    log_dir: str = "./logs"
    log_level: str = "INFO"

    # Physical and discretization defaults
    gravity: float = 9.81  # m/s^2
    default_step: float = 0.01  # s
    default_horizon: int = 100  # steps (1 s maneuver at the default step)

    # Numerics
    rotation_tol: float = 1e-12

    # Batch runs
    max_concurrent_cases: int = 2
    batch_executor: Literal["process", "thread"] = "process"

    @field_validator("gravity", "default_step", "rotation_tol")
    @classmethod
    def must_be_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("default_horizon")
    @classmethod
    def horizon_at_least_two(cls, v: int) -> int:
        if v < 2:
            raise ValueError("horizon must be at least 2 steps")
        return v

    @field_validator("max_concurrent_cases")
    @classmethod
    def concurrency_at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError(
                "PENDULUM_MAX_CONCURRENT_CASES must be at least 1.\n"
                "Example: PENDULUM_MAX_CONCURRENT_CASES=4"
            )
        return v

    @field_validator("log_level")
    @classmethod
    def known_log_level(cls, v: str) -> str:
        v = v.strip().upper()
        if v not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level '{v}'")
        return v

    def ensure_directories(self) -> None:
        """Create required directories if they don't exist."""
        for dir_path in [self.output_dir, self.log_dir]:
            Path(dir_path).mkdir(parents=True, exist_ok=True)

    def get_case_folder(self, base: str, case_id: str) -> Path:
        """Output folder for one case of a batch run."""
        folder = Path(base) / f"case_{case_id}"
        folder.mkdir(parents=True, exist_ok=True)
        return folder


def _load_settings() -> Settings:
    """Load settings with user-friendly error handling."""
    try:
        return Settings()
    except Exception as e:
        print("\n" + "=" * 60)
        print("❌ CONFIGURATION ERROR")
        print("=" * 60)
        print(f"\n{e}\n")
        print("Check your PENDULUM_* environment variables and .env file.")
        print("=" * 60 + "\n")

        import sys
        sys.exit(1)


settings = _load_settings()
