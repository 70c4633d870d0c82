# runs.py
"""SQLAlchemy store for distance runs, their critical points and λ sweeps."""

from __future__ import annotations

import logging
import os
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Optional

import pandas as pd
from sqlalchemy import JSON, DateTime, Float, ForeignKey, Integer, String, create_engine, func
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Mapped, declarative_base, mapped_column, relationship, sessionmaker
from sqlalchemy.pool import NullPool

from errors import InvalidConfig

logger = logging.getLogger("curvedist.runs")

DEFAULT_DB_PATH = Path(__file__).parent / "curvedist.db"


def get_database_url(explicit: Optional[str] = None) -> str:
    """--db URL, then CURVEDIST_DATABASE_URL, then DATABASE_URL, then a local SQLite file."""
    url = explicit or os.environ.get("CURVEDIST_DATABASE_URL") or os.environ.get("DATABASE_URL")
    if url:
        if url.startswith("postgres://"):
            url = url.replace("postgres://", "postgresql://", 1)
        return url
    return f"sqlite:///{DEFAULT_DB_PATH}"


_engines: dict[str, Engine] = {}


def get_engine(url: Optional[str] = None) -> Engine:
    url = get_database_url(url)
    if url not in _engines:
        if url.startswith("postgresql"):
            engine = create_engine(url, poolclass=NullPool)
        elif url.startswith("sqlite"):
            engine = create_engine(url, connect_args={"check_same_thread": False})
        else:
            raise InvalidConfig(f"unsupported database URL {url!r}")
        logger.info("run store at %s", engine.url.render_as_string(hide_password=True))
        _engines[url] = engine
    return _engines[url]


Base = declarative_base()


class Run(Base):
    __tablename__ = "runs"
    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    command: Mapped[str] = mapped_column(String, nullable=False)      # "distance", "solve-bvp" or "sweep"
    created_at: Mapped[datetime] = mapped_column(DateTime, server_default=func.now())
    curve1: Mapped[dict] = mapped_column(JSON, nullable=False)
    curve2: Mapped[dict] = mapped_column(JSON, nullable=False)
    config: Mapped[dict] = mapped_column(JSON, nullable=False)
    value: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    method: Mapped[Optional[str]] = mapped_column(String, nullable=True)
    agree: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    winding: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)

    critical_points = relationship("CriticalPointRecord", back_populates="run", cascade="all, delete-orphan")
    sweep_rows = relationship("SweepRecord", back_populates="run", cascade="all, delete-orphan")


class CriticalPointRecord(Base):
    __tablename__ = "critical_points"
    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("runs.id"), nullable=False)
    rank: Mapped[int] = mapped_column(Integer, nullable=False)          # 0 = lowest energy
    energy: Mapped[float] = mapped_column(Float, nullable=False)
    potential: Mapped[float] = mapped_column(Float, nullable=False)
    kinetic: Mapped[float] = mapped_column(Float, nullable=False)
    residual: Mapped[float] = mapped_column(Float, nullable=False)
    iterations: Mapped[int] = mapped_column(Integer, nullable=False)
    start_index: Mapped[int] = mapped_column(Integer, nullable=False)
    winding: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)

    run = relationship("Run", back_populates="critical_points")


class SweepRecord(Base):
    __tablename__ = "sweep_rows"
    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    run_id: Mapped[int] = mapped_column(ForeignKey("runs.id"), nullable=False)
    lam: Mapped[float] = mapped_column(Float, nullable=False)
    energy_best: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    winding: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    branch_count: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    status: Mapped[str] = mapped_column(String, nullable=False)

    run = relationship("Run", back_populates="sweep_rows")


@contextmanager
def get_session(url: Optional[str] = None):
    session = sessionmaker(bind=get_engine(url))()
    try:
        yield session
        session.commit()
    except Exception:
        session.rollback()
        raise
    finally:
        session.close()


def init_db(url: Optional[str] = None) -> None:
    Base.metadata.create_all(bind=get_engine(url))


# ------- recording -------

def _new_run(db, command: str, curve1: dict, curve2: dict, config: dict) -> Run:
    run = Run(command=command, curve1=curve1, curve2=curve2, config=config)
    db.add(run)
    db.flush()
    return run


def record_critical_points(db, run: Run, points) -> list[CriticalPointRecord]:
    records = []
    for rank, point in enumerate(points):
        summary = point.summary()
        rec = CriticalPointRecord(
            run_id=run.id,
            rank=rank,
            energy=summary["energy"],
            potential=summary["potential"],
            kinetic=summary["kinetic"],
            residual=summary["residual"],
            iterations=summary["iterations"],
            start_index=summary["start_index"],
            winding=summary.get("winding"),
        )
        db.add(rec)
        records.append(rec)
    db.flush()
    return records


def record_distance(db, result, curve1: dict, curve2: dict, config: dict) -> Run:
    """Store a DistanceResult together with its critical points."""
    run = _new_run(db, "distance", curve1, curve2, config)
    run.value = result.value
    run.method = result.method
    run.agree = int(result.agree)
    run.winding = result.winding
    record_critical_points(db, run, result.critical_points)
    logger.info("recorded distance run %d", run.id)
    return run


def record_solve(db, points, curve1: dict, curve2: dict, config: dict) -> Run:
    run = _new_run(db, "solve-bvp", curve1, curve2, config)
    if points:
        best = points[0].summary()
        run.value = best["energy"]
        run.method = "shooting"
        run.winding = best.get("winding")
    record_critical_points(db, run, points)
    return run


def record_sweep(db, rows: pd.DataFrame, curve1: dict, curve2: dict, config: dict) -> Run:
    """Store the rows of a λ sweep (columns lambda, energy_best, winding, branch_count, status)."""
    run = _new_run(db, "sweep", curve1, curve2, config)
    for row in rows.to_dict("records"):
        db.add(
            SweepRecord(
                run_id=run.id,
                lam=float(row["lambda"]),
                energy_best=None if pd.isna(row["energy_best"]) else float(row["energy_best"]),
                winding=None if pd.isna(row["winding"]) else int(row["winding"]),
                branch_count=int(row["branch_count"]),
                status=str(row["status"]),
            )
        )
    db.flush()
    logger.info("recorded sweep run %d with %d rows", run.id, len(rows))
    return run


# ------- loading -------

def get_run(db, run_id: int) -> Run:
    run = db.query(Run).filter(Run.id == run_id).first()
    if not run:
        raise ValueError(f"Run {run_id} not found")
    return run


def load_runs(db, command: Optional[str] = None) -> pd.DataFrame:
    query = db.query(Run)
    if command:
        query = query.filter(Run.command == command)
    runs = query.order_by(Run.id).all()
    return pd.DataFrame(
        [
            {
                "id": r.id,
                "command": r.command,
                "created_at": r.created_at,
                "curve1": r.curve1.get("kind"),
                "curve2": r.curve2.get("kind"),
                "value": r.value,
                "method": r.method,
                "agree": r.agree,
                "winding": r.winding,
                "critical_points": len(r.critical_points),
            }
            for r in runs
        ],
        columns=["id", "command", "created_at", "curve1", "curve2", "value", "method", "agree", "winding",
                 "critical_points"],
    )


def load_critical_points(db, run_id: int) -> pd.DataFrame:
    get_run(db, run_id)
    rows = (
        db.query(CriticalPointRecord)
        .filter(CriticalPointRecord.run_id == run_id)
        .order_by(CriticalPointRecord.rank)
        .all()
    )
    return pd.DataFrame(
        [
            {"rank": r.rank, "energy": r.energy, "residual": r.residual, "start_index": r.start_index,
             "winding": r.winding}
            for r in rows
        ],
        columns=["rank", "energy", "residual", "start_index", "winding"],
    )


def load_sweep(db, run_id: int) -> pd.DataFrame:
    get_run(db, run_id)
    rows = db.query(SweepRecord).filter(SweepRecord.run_id == run_id).order_by(SweepRecord.lam).all()
    frame = pd.DataFrame(
        [
            {"lambda": r.lam, "energy_best": r.energy_best, "winding": r.winding,
             "branch_count": r.branch_count, "status": r.status}
            for r in rows
        ],
        columns=["lambda", "energy_best", "winding", "branch_count", "status"],
    )
    return frame.astype({"winding": "Int64", "branch_count": "Int64"})
