import os
from dataclasses import dataclass

from dotenv import load_dotenv

from .errors import ConfigError


@dataclass(frozen=True)
class Settings:
    threads: int = 1
    hilbert_tol: float = 1e-8
    root_residual: float = 1e-10
    out_dir: str = "results"


def _positive(name: str, raw: str, cast):
    try:
        value = cast(raw)
    except ValueError:
        raise ConfigError(f"{name} must be a positive {cast.__name__}, got '{raw}'")
    if value <= 0:
        raise ConfigError(f"{name} must be a positive {cast.__name__}, got '{raw}'")
    return value


def load_settings() -> Settings:
    """
    Read analysis settings from the environment (and a .env file if present).

    Recognised variables: CHH_THREADS, CHH_HILBERT_TOL, CHH_ROOT_RESIDUAL, CHH_OUT_DIR.
    Unset variables fall back to the Settings defaults.
    """
    load_dotenv()

    defaults = Settings()
    threads = os.getenv("CHH_THREADS")
    hilbert_tol = os.getenv("CHH_HILBERT_TOL")
    root_residual = os.getenv("CHH_ROOT_RESIDUAL")
    out_dir = os.getenv("CHH_OUT_DIR")

    return Settings(
        threads=_positive("CHH_THREADS", threads, int) if threads else defaults.threads,
        hilbert_tol=_positive("CHH_HILBERT_TOL", hilbert_tol, float) if hilbert_tol else defaults.hilbert_tol,
        root_residual=(
            _positive("CHH_ROOT_RESIDUAL", root_residual, float) if root_residual else defaults.root_residual
        ),
        out_dir=out_dir or defaults.out_dir,
    )
