import threading
from fractions import Fraction
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .divisor_graph import IllegalTripleError, ReductionTriple
from .local_stats import StatKind, StatRangeError, check_range
from .logger_utils import LoggingAgent


class CacheCorruptionError(Exception):
    pass


class TermRecord(BaseModel):
    """One evaluated statistic; serialised as a single JSON line."""

    model_config = ConfigDict(frozen=True)

    kind: StatKind
    i: int
    d: int
    t: int
    num: str
    den: str

    @field_validator("num", "den")
    @classmethod
    def _decimal_string(cls, v: str) -> str:
        if not v.lstrip("-").isdigit():
            raise ValueError(f"{v!r} is not a decimal integer string")
        return v

    @model_validator(mode="after")
    def _consistent(self) -> "TermRecord":
        try:
            ReductionTriple(self.i, self.d, self.t)
            if int(self.den) <= 0:
                raise ValueError("denominator must be positive")
            check_range(self.kind, self.value)
        except (IllegalTripleError, StatRangeError) as e:
            raise ValueError(str(e))
        return self

    @property
    def key(self) -> tuple[StatKind, int, int, int]:
        return (self.kind, self.i, self.d, self.t)

    @property
    def value(self) -> Fraction:
        return Fraction(int(self.num), int(self.den))

    @classmethod
    def from_value(
        cls, kind: StatKind, i: int, d: int, t: int, value: Fraction
    ) -> "TermRecord":
        value = Fraction(value)
        return cls(
            kind=kind, i=i, d=d, t=t,
            num=str(value.numerator), den=str(value.denominator),
        )


class TermCache:
    """
    Append-only JSONL store of evaluated terms.

    Loading validates every line; a repeated key must carry the same value.
    Writes go through a lock and are flushed per record, so an interrupted
    run resumes from everything written before the interruption.
    """

    def __init__(self, path: Optional[Path] = None):
        self.path = Path(path) if path is not None else None
        self._values: dict[tuple[StatKind, int, int, int], Fraction] = {}
        self._lock = threading.Lock()
        self.logger = LoggingAgent("TermCache").logger
        if self.path is not None:
            self._load()

    def __len__(self) -> int:
        return len(self._values)

    def __contains__(self, key: tuple) -> bool:
        kind, i, d, t = key
        return (StatKind(kind), i, d, t) in self._values

    def _load(self) -> None:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = TermRecord.model_validate_json(line)
                except ValidationError as e:
                    raise CacheCorruptionError(
                        f"{self.path}:{line_no}: invalid term record ({e.error_count()} errors)"
                    ) from e
                self._remember(record, line_no)
        self.logger.info(f"Loaded {len(self._values)} cached terms from {self.path}")

    def _remember(self, record: TermRecord, line_no: Optional[int] = None) -> bool:
        known = self._values.get(record.key)
        if known is None:
            self._values[record.key] = record.value
            return True
        if known != record.value:
            where = f"{self.path}:{line_no}" if line_no else str(self.path)
            raise CacheCorruptionError(
                f"{where}: {record.kind.value}{record.key[1:]} recorded as both {known} and {record.value}"
            )
        return False

    def get(self, kind: StatKind, i: int, d: int, t: int) -> Optional[Fraction]:
        return self._values.get((StatKind(kind), i, d, t))

    def put(self, kind: StatKind, i: int, d: int, t: int, value: Fraction) -> None:
        record = TermRecord.from_value(StatKind(kind), i, d, t, value)
        with self._lock:
            if not self._remember(record):
                return
            if self.path is None:
                return
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(record.model_dump_json() + "\n")
                handle.flush()
