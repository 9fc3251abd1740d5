# config.py
from pathlib import Path
from pydantic_settings import BaseSettings

BASE_DIR = Path(__file__).parent
RESULTS_DIR = BASE_DIR / "results"

class Settings(BaseSettings):
    # Monte Carlo
    MC_SAMPLES: int = 100_000
    MC_MIN_SAMPLES: int = 1_000
    MC_SEED: int = 42
    MC_BLOCK_SIZE: int = 4096  # part of the random stream definition
    MC_THREADS: int = 1

    # Mellin-Barnes contours
    CONTOUR_PANEL_ORDER: int = 16
    CONTOUR_MIN_NODES: int = 64
    CONTOUR_TAIL_RATIO: float = 1e-16
    CONTOUR_SCAN_STEP: float = 0.5
    CONTOUR_MAX_HALF_LENGTH: float = 400.0
    CONTOUR_ERROR_FLOOR: float = 1e-13

    # Adaptive quadrature
    QUAD_EPSABS: float = 1e-12
    QUAD_EPSREL: float = 1e-11
    QUAD_LIMIT: int = 500

    # Parameter derivatives of the Tricomi function
    DERIVATIVE_STEP: float = 1e-4

    # Consistency guards
    CDF_CLAMP_TOLERANCE: float = 1e-9
    RCOND_THRESHOLD: float = 1e-12
    CALIBRATION_TOLERANCE: float = 1e-6

    # Memoization
    CACHE_MAX_ENTRIES: int = 200_000

    # Logging
    LOG_LEVEL: str = "WARNING"

    class Config:
        env_file = ".env"

    @property
    def results_dir(self) -> Path:
        return RESULTS_DIR

settings = Settings()
