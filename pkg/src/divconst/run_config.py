import os
from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from .config_utils import CACHE_DIR_ENV, KernelSettings, OracleSettings, PathConfig, RootConfig
from .local_stats import CONSTANT_KINDS
from .presets import PRESETS, BudgetSpec, resolve_budget


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TEXT = "text"


def default_cache_path(constant: str) -> Optional[Path]:
    """DIVCONST_CACHE_DIR, else the configured cache directory, else no cache."""
    override = os.getenv(CACHE_DIR_ENV)
    if override:
        return Path(override) / f"{constant}.jsonl"
    if RootConfig.is_configured():
        return PathConfig().default_cache_file(constant)
    return None


class RunConfig(BaseModel):
    """
    Validated input of one CLI command.

    Presets are resolved to an explicit ``BudgetSpec`` by ``budget_spec``
    before anything runs.
    """

    command: str
    constant: Optional[str] = None
    budget: Optional[int] = Field(default=None, gt=0)
    preset: Optional[str] = None
    obs2_jmax: Optional[int] = Field(default=None, ge=0)
    cache: Optional[Path] = None
    use_cache: bool = True
    output_format: OutputFormat = OutputFormat.JSON
    max_vertices: Optional[int] = Field(default=None, ge=1)
    max_oracle_n: Optional[int] = Field(default=None, ge=1)
    n: Optional[int] = Field(default=None, ge=1)
    limit: Optional[int] = Field(default=None, ge=2)
    workers: Optional[int] = Field(default=None, ge=1)

    @field_validator("constant")
    @classmethod
    def _known_constant(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in CONSTANT_KINDS:
            raise ValueError(f"unknown constant {value!r}; choose from {', '.join(CONSTANT_KINDS)}")
        return value

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in PRESETS:
            raise ValueError(f"unknown preset {value!r}; choose from {', '.join(sorted(PRESETS))}")
        return value

    @model_validator(mode="after")
    def _one_budget(self):
        if self.budget is not None and self.preset is not None:
            raise ValueError("give either a budget or a preset, not both")
        return self

    @property
    def budget_spec(self) -> BudgetSpec:
        return resolve_budget(self.budget, self.preset)

    @property
    def cache_path(self) -> Optional[Path]:
        if not self.use_cache:
            return None
        if self.cache is not None:
            return self.cache
        return default_cache_path(self.constant) if self.constant else None

    def kernel_limits(self) -> KernelSettings:
        limits = KernelSettings.load()
        if self.max_vertices is not None:
            limits = limits.model_copy(
                update={
                    "max_vertices": self.max_vertices,
                    "path_cover_max_vertices": min(limits.path_cover_max_vertices, self.max_vertices),
                }
            )
        return limits

    def oracle_settings(self) -> OracleSettings:
        settings = OracleSettings.load()
        if self.max_oracle_n is not None:
            settings = settings.model_copy(update={"max_decomposed_n": self.max_oracle_n})
        return settings
