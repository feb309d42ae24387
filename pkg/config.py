import logging
from pydantic import field_validator
from pydantic_settings import BaseSettings
from dotenv import load_dotenv
from typing import Optional

# Load environment variables from .env file
load_dotenv()


class Settings(BaseSettings):
    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    LOG_MAX_SIZE: int = 10 * 1024 * 1024  # 10 MB
    LOG_BACKUP_COUNT: int = 5

    # Finite differences; FD_STEP=None means h = 1e-4 * (1 + |a_x|)
    FD_STEP: Optional[float] = None
    FD_TOL: float = 1e-6

    # Equivalence checking
    REL_TOL: float = 1e-9
    MATRIX_BOUND: int = 10
    M_BOUND: int = 64
    ORIENTATION_PRESERVING: bool = False

    # Seeds property-test fixture generation only
    SEED: Optional[int] = None

    @field_validator('LOG_LEVEL', mode='before')
    @classmethod
    def normalize_log_level(cls, v):
        if isinstance(v, str):
            v = v.strip().upper()
            if not isinstance(logging.getLevelName(v), int):
                raise ValueError(f"Unknown log level: {v}")
        return v

    @field_validator('FD_STEP', 'FD_TOL', 'REL_TOL')
    @classmethod
    def check_positive_real(cls, v):
        if v is not None and v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator('MATRIX_BOUND', 'M_BOUND')
    @classmethod
    def check_positive_bound(cls, v):
        if v < 1:
            raise ValueError("search bounds must be at least 1")
        return v

    class Config:
        env_file = '.env'
        env_prefix = 'SCHEME_KIT_'
        extra = 'ignore'

# Create settings instance
settings = Settings()
