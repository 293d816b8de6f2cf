from abc import ABC, abstractmethod
from datetime import datetime
from pathlib import Path
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from ..config_utils import PathConfig
from ..estimator import ConstantInterval
from ..logger_utils import LoggingAgent
from ..time_utils import get_current_time
from .models import Base, EstimateRun


class BaseSQLAgent(ABC):
    """
    Abstract Base Class for SQL Agents.
    Defines the interface that all concrete SQL Agents must implement.
    """

    @abstractmethod
    def __init__(self) -> None:
        pass

    @abstractmethod
    def SessionLocal(self):
        """
        Returns the sessionmaker instance for the database.
        This method must be implemented by all subclasses.
        """
        pass


class SQLiteAgent(BaseSQLAgent):
    """
    SQLite run ledger at ``paths.sql_db`` unless a path is given.
    """

    def __init__(self, sql_db_path: Optional[Path] = None) -> None:
        self._sql_db_path = Path(sql_db_path) if sql_db_path else PathConfig().sql_db_path
        self._sql_db_path.parent.mkdir(parents=True, exist_ok=True)
        self._engine = create_engine(f"sqlite:///{self._sql_db_path}")
        self._SessionLocal = sessionmaker(
            autocommit=False, autoflush=False, bind=self._engine
        )
        Base.metadata.create_all(bind=self._engine)

    @property
    def SessionLocal(self):
        """
        Returns the sessionmaker instance.
        """
        return self._SessionLocal


class RunLedger:
    def __init__(self, sql_agent: Optional[BaseSQLAgent] = None):
        self.sql_agent = sql_agent or SQLiteAgent()
        self.logger = LoggingAgent("RunLedger").logger

    def record(self, interval: ConstantInterval, started_at: datetime) -> int:
        with self.sql_agent.SessionLocal() as session:
            run = EstimateRun(
                constant=interval.name,
                budget=interval.budget,
                obs2_jmax=interval.obs2_jmax,
                lo=interval.lo,
                hi=interval.hi,
                digits=interval.digits,
                covered_mass=interval.covered_mass,
                terms_evaluated=interval.terms_evaluated,
                terms_credited=interval.terms_credited,
                terms_skipped=interval.terms_skipped,
                started_at=started_at,
                finished_at=get_current_time(),
            )
            session.add(run)
            session.commit()
            self.logger.info(f"Recorded run {run.id} for {interval.name}")
            return run.id

    def list_runs(self) -> list[dict]:
        with self.sql_agent.SessionLocal() as session:
            return [run.to_dict() for run in session.query(EstimateRun).order_by(EstimateRun.id).all()]

    def get(self, run_id: int) -> Optional[dict]:
        with self.sql_agent.SessionLocal() as session:
            run = session.get(EstimateRun, run_id)
            return run.to_dict() if run else None
