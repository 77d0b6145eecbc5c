from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Coefficients with magnitude below this are treated as zero
    ZERO_TOL: float = Field(default=1e-9, gt=0, le=1e-3)
    # Default truncation order = TRUNC_FACTOR x (largest exponent in the input)
    TRUNC_FACTOR: int = Field(default=4, ge=1)
    MIN_TRUNC_ORDER: int = Field(default=1, ge=1)

    CONTRACTION_MAX_ITER: int = 64
    LIFT_MAX_STEPS: int = 256
    ROOT_POLISH_STEPS: int = 8
    ROOT_MERGE_TOL: float = 1e-6

    MAX_WORKERS: int = 8
    LOG_LEVEL: str = "INFO"

    # Environment variables are prefixed, e.g. LGMIRROR_ZERO_TOL=1e-10
    model_config = SettingsConfigDict(
        env_file=".env", env_prefix="LGMIRROR_", extra="ignore"
    )


# Create a single instance of the settings to use everywhere
settings = Settings()
