# Configuration settings for the discrete convexity testing toolkit
import os
import logging
from dataclasses import dataclass
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class TesterConfig:
    """Round-count settings shared by every tester"""
    const_c: int = int(os.getenv("CONVEXITY_CONST_C", "40"))


@dataclass
class ExperimentConfig:
    """Experiment harness configuration"""
    trials: int = int(os.getenv("CONVEXITY_TRIALS", "100"))
    workers: int = int(os.getenv("CONVEXITY_WORKERS", "4"))
    output_dir: str = os.getenv("CONVEXITY_OUTPUT_DIR", "results")


@dataclass
class InstanceConfig:
    """Limits on materialized instances"""
    max_dense_points: int = int(os.getenv("CONVEXITY_MAX_DENSE_POINTS", str(2 ** 20)))
    max_enumeration_points: int = int(os.getenv("CONVEXITY_MAX_ENUMERATION_POINTS", "30"))


@dataclass
class LoggingConfig:
    """Logging configuration"""
    level: str = os.getenv("CONVEXITY_LOG_LEVEL", "INFO").upper()
    format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Config:
    """Main configuration class"""

    def __init__(self):
        self.tester = TesterConfig()
        self.experiment = ExperimentConfig()
        self.instances = InstanceConfig()
        self.logging = LoggingConfig()

    def validate(self) -> bool:
        """Validate configuration values"""
        errors = []

        if self.tester.const_c < 1:
            errors.append(f"CONVEXITY_CONST_C must be >= 1, got {self.tester.const_c}")
        if self.experiment.trials < 1:
            errors.append(f"CONVEXITY_TRIALS must be >= 1, got {self.experiment.trials}")
        if self.experiment.workers < 1:
            errors.append(f"CONVEXITY_WORKERS must be >= 1, got {self.experiment.workers}")
        if self.instances.max_dense_points < 1:
            errors.append("CONVEXITY_MAX_DENSE_POINTS must be >= 1")
        if self.instances.max_enumeration_points < 1:
            errors.append("CONVEXITY_MAX_ENUMERATION_POINTS must be >= 1")
        if self.logging.level not in LOG_LEVELS:
            errors.append(f"CONVEXITY_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")

        if errors:
            logger.error("Configuration errors:")
            for error in errors:
                logger.error(f"  - {error}")
            return False
        return True


# Global configuration instance
config = Config()
