from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    # Environment
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    TOOL_VERSION: str = "1.0.0"

    # Outputs
    OUTPUT_DIR: str = "runs"
    DEFAULT_SEED: int = 0
    JOBS: int = 1

    # Simulation
    FINE_DT: float = 0.005  # baseline oracle step (s)
    BASELINE_GRID_STEP: float = 0.01  # m/s^2

    # Observation normalization
    V_SCALE: float = 30.0  # m/s
    D_SCALE: float = 50.0  # m
    A_SCALE: float = 10.0  # m/s^2

    # Evaluation
    CI_SCENARIOS: int = 1000
    FULL_SCENARIOS: int = 10000

    class Config:
        env_file = ".env"
        case_sensitive = True


@lru_cache()
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
