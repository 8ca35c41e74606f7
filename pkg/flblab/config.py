from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Lab settings loaded from FLBLAB_* environment variables."""

    log_level: str = Field("INFO", description="Logging level")
    out_dir: str = Field("results", description="Directory for CSV, SVG and instances")
    experiments_dir: str = Field(
        "experiments", description="Directory holding experiment config files"
    )
    seed: int = Field(20240601, description="Default seed for generators")
    workers: int = Field(
        1, ge=1, description="Process pool width for experiment trials (1 = serial)"
    )
    bisect_xtol: float = Field(
        1e-12, gt=0, description="Absolute tolerance for bisection root-finding"
    )
    feasibility_tol: float = Field(
        1e-9, ge=0, description="Slack on ln-scale feasibility comparisons"
    )
    violation_tol: float = Field(
        1e-9, ge=0, description="Slack on certificate and invariant checks"
    )

    model_config = {
        "env_prefix": "FLBLAB_",
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }


settings = Settings()
