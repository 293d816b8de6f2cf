import os
from pathlib import Path
from typing import ClassVar, Optional

import yaml
from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()

CACHE_DIR_ENV = "DIVCONST_CACHE_DIR"


class ConfigYMLPathNotSetError(Exception):
    pass


class RootConfig:
    def __init__(self, config_path: Optional[str] = None) -> None:
        config_path = config_path or os.getenv("CONFIG_PATH")
        if not config_path:
            raise ConfigYMLPathNotSetError(
                "CONFIG_PATH environment variable is not set. Please set the path to the configuration file."
            )
        self._config_path = Path(config_path)

        try:
            with open(self._config_path, "r") as config_file:
                self._config = yaml.safe_load(config_file) or {}
        except FileNotFoundError:
            raise FileNotFoundError(f"Configuration file not found at {config_path}")
        except PermissionError:
            raise PermissionError(
                f"Permission denied while trying to read the config file at {config_path}"
            )
        except yaml.YAMLError as e:
            raise ValueError(f"Error parsing YAML configuration: {e}")

    @property
    def config(self) -> dict:
        """Provides access to the loaded configuration."""
        return self._config

    @property
    def config_path(self) -> Path:
        return self._config_path

    @staticmethod
    def is_configured() -> bool:
        return bool(os.getenv("CONFIG_PATH"))


class PathConfig:
    def __init__(self, config_path: Optional[str] = None):
        self.config = RootConfig(config_path).config
        self._base_dir = Path(self._get_path_from_config("paths", "base"))

    def _get_path_from_config(self, *keys: str) -> str:
        """
        Helper method to retrieve a nested path from the configuration using provided keys.
        Args:
            keys: The hierarchical keys to reach the desired path.
        Returns:
            str: The retrieved path as a string.
        """
        path = self.config
        for key in keys:
            path = path.get(key)
            if path is None:
                raise KeyError(f"Key {'/'.join(keys)} not found in configuration.")
        return path

    @property
    def base_dir(self) -> Path:
        """Returns the base directory path."""
        return self._base_dir

    @property
    def log_dir_path(self) -> Path:
        """Returns the log directory path."""
        return self.base_dir / self._get_path_from_config("paths", "log_dir")

    @property
    def cache_dir_path(self) -> Path:
        """Term cache directory; DIVCONST_CACHE_DIR overrides the YAML value."""
        override = os.getenv(CACHE_DIR_ENV)
        if override:
            return Path(override)
        return self.base_dir / self._get_path_from_config("paths", "cache_dir")

    @property
    def sql_db_path(self) -> Path:
        """Returns the run ledger database path."""
        return self.base_dir / self._get_path_from_config("paths", "sql_db")

    def default_cache_file(self, constant: str) -> Path:
        return self.cache_dir_path / f"{constant}.jsonl"


def log_level() -> str:
    if RootConfig.is_configured():
        level = RootConfig().config.get("log_level")
        if level:
            return str(level).upper()
    return os.getenv("LOG_LEVEL", "INFO").upper()


class _SectionSettings(BaseSettings):
    """Shared loader for the YAML sections below."""

    section: ClassVar[str] = ""

    @classmethod
    def from_file(cls, config_path: Path):
        """Loads the section from a YAML file; DIVCONST_* environment variables win."""
        with open(config_path, "r") as file:
            config = yaml.safe_load(file) or {}
        prefix = cls.model_config.get("env_prefix", "").upper()
        overridden = {key.upper() for key in os.environ}
        values = {
            key: value
            for key, value in (config.get(cls.section) or {}).items()
            if f"{prefix}{key}".upper() not in overridden
        }
        return cls(**values)

    @classmethod
    def load(cls):
        """YAML section when CONFIG_PATH is set, otherwise defaults plus env."""
        if RootConfig.is_configured():
            return cls.from_file(RootConfig().config_path)
        return cls()


class KernelSettings(_SectionSettings):
    """
    Resource guards for the counting kernels.

    Attributes:
        max_vertices (int): largest graph any counting kernel accepts.
        path_cover_dp_threshold (int): subset DP is used up to this many vertices.
        path_cover_max_vertices (int): largest component handed to the path-cover solver.
        solver_time_limit (float): seconds CP-SAT may spend proving one optimum.
        solver_workers (int): CP-SAT search workers per call.
    """

    section: ClassVar[str] = "kernels"

    max_vertices: int = Field(default=96, ge=1)
    path_cover_dp_threshold: int = Field(default=20, ge=1, le=24)
    path_cover_max_vertices: int = Field(default=128, ge=1)
    solver_time_limit: float = Field(default=120.0, gt=0)
    solver_workers: int = Field(default=4, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="DIVCONST_KERNEL_", env_file=".env", extra="ignore"
    )


class EstimatorSettings(_SectionSettings):
    section: ClassVar[str] = "estimator"

    obs2_jmax: int = Field(default=40, ge=0)
    workers: int = Field(default=1, ge=1)
    precision_bits: int = Field(default=128, ge=64)
    output_digits: int = Field(default=12, ge=1, le=30)
    ledger: bool = True

    model_config = SettingsConfigDict(
        env_prefix="DIVCONST_ESTIMATOR_", env_file=".env", extra="ignore"
    )


class OracleSettings(_SectionSettings):
    section: ClassVar[str] = "oracle"

    max_exhaustive_n: int = Field(default=22, ge=1)
    max_decomposed_n: int = Field(default=64, ge=1)
    max_path_cover_n: int = Field(default=24, ge=1)
    max_model_n: int = Field(default=4000, ge=1)
    model_time_limit: float = Field(default=900.0, gt=0)
    conjecture_limit: int = Field(default=120, ge=2)

    model_config = SettingsConfigDict(
        env_prefix="DIVCONST_ORACLE_", env_file=".env", extra="ignore"
    )
