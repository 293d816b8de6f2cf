from datetime import datetime

from sqlalchemy import DateTime, Integer, String
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column

from ..time_utils import get_current_time


class Base(DeclarativeBase):
    pass


class EstimateRun(Base):
    """
    One finished `estimate` invocation.

    Attributes:
        - id: primary key.
        - constant: alpha, beta, eta, theta, b or c.
        - budget: budget descriptor, e.g. "d*i^5<=1000000" or a preset name.
        - obs2_jmax: depth of the multiplication-rule crediting.
        - lo, hi: the certified interval as fixed-point decimal strings.
        - digits: decimals carried by lo and hi.
        - covered_mass: exact rational mass of the evaluated and credited terms.
        - terms_evaluated, terms_credited, terms_skipped: term counters.
        - started_at, finished_at: UTC timestamps.
    """

    __tablename__ = "estimate_run"

    id: Mapped[int] = mapped_column(
        Integer, primary_key=True, index=True, autoincrement=True
    )
    constant: Mapped[str] = mapped_column(String(16), nullable=False, index=True)
    budget: Mapped[str] = mapped_column(String(64), nullable=False)
    obs2_jmax: Mapped[int] = mapped_column(Integer, nullable=False)
    lo: Mapped[str] = mapped_column(String(64), nullable=False)
    hi: Mapped[str] = mapped_column(String(64), nullable=False)
    digits: Mapped[int] = mapped_column(Integer, nullable=False)
    # exact rationals grow long; no length limit
    covered_mass: Mapped[str] = mapped_column(String, nullable=False)
    terms_evaluated: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    terms_credited: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    terms_skipped: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    started_at: Mapped[datetime] = mapped_column(
        DateTime, nullable=False, default=get_current_time
    )
    finished_at: Mapped[datetime] = mapped_column(
        DateTime, nullable=False, default=get_current_time
    )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "constant": self.constant,
            "budget": self.budget,
            "obs2_jmax": self.obs2_jmax,
            "lo": self.lo,
            "hi": self.hi,
            "digits": self.digits,
            "covered_mass": self.covered_mass,
            "terms_evaluated": self.terms_evaluated,
            "terms_credited": self.terms_credited,
            "terms_skipped": self.terms_skipped,
            "started_at": self.started_at.isoformat(),
            "finished_at": self.finished_at.isoformat(),
        }
