import os
from typing import Literal

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from the project root, then backend/ as fallback
BASE_DIR = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
load_dotenv(os.path.join(BASE_DIR, "..", ".env"))
load_dotenv(os.path.join(BASE_DIR, ".env"))


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="RGC_", extra="ignore")

    tool_name: str = "rgc-dim"
    tool_version: str = "1.0.0"

    # Geometry
    geometric_tolerance: float = 1e-12
    cech_exact_max_points: int = 500

    # Point process
    poisson_inversion_max: float = 30.0

    # Oracle caps
    oracle_max_clique_vertices: int = 25
    oracle_max_cech_points: int = 20
    oracle_max_ballot_steps: int = 14

    # Analytics
    regime_i_threshold: float = 10.0
    mu_samples: int = 200_000

    # Monte Carlo harness
    workers: int = 1
    mc_block_size: int = 20_000
    max_http_trials: int = 10_000

    # Output / logging
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    output_format: Literal["csv", "json"] = "csv"


settings = Settings()
