import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .constants import ENV_LOG_DIR, ENV_LOG_LEVEL, ENV_SEED, ENV_STRICT_GATES, ENV_WORKERS
from .qot_exceptions import ConfigError

# Load environment variables
load_dotenv()


class Settings(BaseModel):
    """Runtime settings read from the environment (or a .env file)."""

    seed: int = Field(0, ge=0, lt=2**64, description="Default master seed")
    log_level: str = Field("INFO", description="Root level of the rabin_qot logger")
    log_dir: str | None = Field(None, description="Directory for per-severity log files")
    workers: int = Field(1, ge=1, description="Thread pool size for batch runs")
    strict_gates: bool = Field(True, description="Reject non-unitary gates in apply_gate")

    model_config = ConfigDict(frozen=True)

    @field_validator("log_level")
    def check_log_level(cls, value):
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value}")
        return value


def _env_int(name: str, default: str) -> int:
    raw = os.getenv(name, default)
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(name, raw, "must be an integer") from None


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings(
        seed=_env_int(ENV_SEED, "0"),
        log_level=os.getenv(ENV_LOG_LEVEL, "INFO"),
        log_dir=os.getenv(ENV_LOG_DIR) or None,
        workers=_env_int(ENV_WORKERS, "1"),
        strict_gates=os.getenv(ENV_STRICT_GATES, "true").lower() not in {"0", "false", "no"},
    )
