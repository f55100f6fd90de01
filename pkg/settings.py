"""
Runtime configuration and logging setup.

Values come from the environment (prefix ``DIMER_MIRROR_``), optionally
seeded from a ``.env`` file in the working directory.
"""

import logging
import os
from datetime import datetime
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="DIMER_MIRROR_", extra="ignore")

    threads: int = Field(default=1, ge=1)
    log_level: str = "INFO"
    log_dir: str = "."
    log_to_file: bool = True
    default_order: int = Field(default=2, ge=0)
    max_radius_retries: int = Field(default=3, ge=0)
    class_size_limit: int = Field(default=200_000, ge=1)


@lru_cache(maxsize=1)
def get_settings():
    return Settings()


def setup_logging(settings=None):
    """Configure root logging: daily log file plus console."""
    settings = settings or get_settings()
    handlers = [logging.StreamHandler()]
    if settings.log_to_file:
        log_name = f'dimer_mirror_{datetime.now().strftime("%Y%m%d")}.log'
        handlers.append(logging.FileHandler(os.path.join(settings.log_dir, log_name)))
    logging.basicConfig(
        level=getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
    )
