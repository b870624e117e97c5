#!/usr/bin/env python3
"""
Configuration for qprism
Environment-driven defaults for the verification suites and the CLI
"""

import logging
import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"Ignoring non-integer {name}={raw!r}")
        return default


@dataclass(frozen=True)
class Settings:
    """Runtime settings, read once from the environment"""

    threads: int = 1
    log_level: str = "WARNING"

    # Ring parameters
    p: int = 3
    N: int = 4
    M: int = 6
    s: int = 1

    # Suite shape
    d: int = 2
    rank: int = 2
    trials: int = 100
    seed: int = 0

    # Search bounds
    degree_bound: int = 2
    pd_trunc: int = 8
    window: int = 1
    max_pd_trunc: int = 16


def get_settings() -> Settings:
    """Build settings from QPRISM_* environment variables"""
    return Settings(
        threads=max(1, _env_int("QPRISM_THREADS", 1)),
        log_level=os.getenv("QPRISM_LOG_LEVEL", "WARNING").upper(),
        p=_env_int("QPRISM_P", 3),
        N=_env_int("QPRISM_N", 4),
        M=_env_int("QPRISM_M", 6),
        s=_env_int("QPRISM_S", 1),
        d=_env_int("QPRISM_D", 2),
        rank=_env_int("QPRISM_RANK", 2),
        trials=_env_int("QPRISM_TRIALS", 100),
        seed=_env_int("QPRISM_SEED", 0),
        degree_bound=_env_int("QPRISM_DEGREE_BOUND", 2),
        pd_trunc=_env_int("QPRISM_PD_TRUNC", 8),
        window=_env_int("QPRISM_WINDOW", 1),
        max_pd_trunc=_env_int("QPRISM_MAX_PD_TRUNC", 16),
    )


def configure_logging(level: str = None) -> None:
    """Install the root handler; safe to call more than once"""
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format=LOG_FORMAT)
