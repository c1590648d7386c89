from pydantic_settings import BaseSettings
from typing import Optional
from dotenv import load_dotenv
import logging
import os

from lobnet import __version__

load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() in ("true", "1", "yes")


class Settings(BaseSettings):

    # Application
    service_name: str = os.getenv("LOBNET_SERVICE_NAME", "lobnet")
    service_version: str = os.getenv("LOBNET_SERVICE_VERSION", __version__)
    environment: str = os.getenv("LOBNET_ENVIRONMENT", "development")
    testing: bool = _env_bool("LOBNET_TESTING", "False")
    log_level: str = os.getenv("LOBNET_LOG_LEVEL", "INFO")

    # Tracing
    tracing_enabled: bool = _env_bool("LOBNET_TRACING_ENABLED", "False")
    otlp_endpoint: str = os.getenv("LOBNET_OTLP_ENDPOINT", "http://localhost:4317")

    # Run defaults (CLI flags override)
    default_seed: int = int(os.getenv("LOBNET_SEED", "0"))  # never wall-clock
    default_jobs: int = int(os.getenv("LOBNET_JOBS", "1"))

    # Order flow
    limit_fraction: float = float(os.getenv("LOBNET_LIMIT_FRACTION", "0.10"))  # daily price band
    lot_size: int = int(os.getenv("LOBNET_LOT_SIZE", "100"))

    # Power-law fitting
    significance: float = float(os.getenv("LOBNET_SIGNIFICANCE", "0.01"))
    bootstrap_replicas: int = int(os.getenv("LOBNET_BOOTSTRAP_REPLICAS", "1000"))
    min_tail_points: int = int(os.getenv("LOBNET_MIN_TAIL_POINTS", "25"))
    min_sample_points: int = int(os.getenv("LOBNET_MIN_SAMPLE_POINTS", "50"))
    max_xmin_candidates: int = int(os.getenv("LOBNET_MAX_XMIN_CANDIDATES", "400"))

    # Network profiles
    knn_bins: int = int(os.getenv("LOBNET_KNN_BINS", "18"))
    size_degree_bins: int = int(os.getenv("LOBNET_SIZE_DEGREE_BINS", "24"))
    size_degree_threshold: float = float(os.getenv("LOBNET_SIZE_DEGREE_THRESHOLD", "3000"))

    # Fitness model
    fitness_replicas: int = int(os.getenv("LOBNET_FITNESS_REPLICAS", "1000"))
    fitness_pool_mode: str = os.getenv("LOBNET_FITNESS_POOL_MODE", "executed")

    # Order size s in k ~ s^beta: "submitted" or "executed"
    order_size_basis: str = os.getenv("LOBNET_ORDER_SIZE_BASIS", "submitted")

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


settings = Settings()


def validate_configuration(current: Optional[Settings] = None) -> bool:
    """Validate that the statistical defaults are usable; warn otherwise."""
    current = current or settings
    errors = []

    if not 0.0 < current.significance < 1.0:
        errors.append(f"significance ({current.significance}) must lie in (0, 1)")

    if current.bootstrap_replicas < 100:
        errors.append(
            f"bootstrap_replicas ({current.bootstrap_replicas}) is below 100; "
            "p-values will be too coarse for a 0.01 test"
        )

    if current.min_tail_points < 25:
        errors.append(f"min_tail_points ({current.min_tail_points}) < 25 makes tail fits unstable")

    if not 0.0 < current.limit_fraction < 1.0:
        errors.append(f"limit_fraction ({current.limit_fraction}) must lie in (0, 1)")

    if current.fitness_pool_mode not in ("executed", "submitted"):
        errors.append(f"fitness_pool_mode must be 'executed' or 'submitted', got {current.fitness_pool_mode!r}")

    if current.order_size_basis not in ("executed", "submitted"):
        errors.append(f"order_size_basis must be 'executed' or 'submitted', got {current.order_size_basis!r}")

    if errors:
        logger = logging.getLogger(__name__)
        logger.warning("Configuration issues found:")
        for error in errors:
            logger.warning(f"  - {error}")

    return len(errors) == 0


# Run validation on import
if not settings.testing:
    validate_configuration()
