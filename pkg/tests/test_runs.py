"""Run store: URLs, recording and loading."""

import numpy as np
import pandas as pd
import pytest

import audit_runs
import runs
from config import RunConfig
from curves import curve_to_dict, make_circle
from distance import distance
from errors import InvalidConfig


@pytest.fixture
def db(db_url):
    runs.init_db(db_url)
    with runs.get_session(db_url) as session:
        yield session


def _sweep_frame():
    frame = pd.DataFrame(
        {
            "lambda": [2.0, 1.0, 3.0],
            "energy_best": [4.0, 2.0, np.nan],
            "winding": [0, 0, None],
            "branch_count": [2, 1, 0],
            "status": ["ok", "ok", "failed"],
        }
    )
    return frame.astype({"winding": "Int64", "branch_count": "Int64"})


def test_database_url_precedence(monkeypatch):
    monkeypatch.delenv("CURVEDIST_DATABASE_URL", raising=False)
    monkeypatch.delenv("DATABASE_URL", raising=False)
    assert runs.get_database_url() == f"sqlite:///{runs.DEFAULT_DB_PATH}"
    monkeypatch.setenv("DATABASE_URL", "sqlite:///b.db")
    assert runs.get_database_url() == "sqlite:///b.db"
    monkeypatch.setenv("CURVEDIST_DATABASE_URL", "sqlite:///a.db")
    assert runs.get_database_url() == "sqlite:///a.db"
    assert runs.get_database_url("sqlite:///c.db") == "sqlite:///c.db"


def test_heroku_style_postgres_url_is_rewritten():
    assert runs.get_database_url("postgres://u:p@host/db") == "postgresql://u:p@host/db"


def test_unsupported_url():
    with pytest.raises(InvalidConfig):
        runs.get_engine("mysql://host/db")


def test_record_and_load_distance(db):
    c = make_circle(1.0)
    cfg = RunConfig(grid=32)
    result = distance(c, c, cfg)
    run = runs.record_distance(db, result, curve_to_dict(c), curve_to_dict(c), cfg.as_dict())

    table = runs.load_runs(db)
    assert list(table["id"]) == [run.id]
    assert table.loc[0, "command"] == "distance"
    assert table.loc[0, "curve1"] == "circle"
    assert table.loc[0, "critical_points"] == len(result.critical_points)

    points = runs.load_critical_points(db, run.id)
    assert list(points["rank"]) == list(range(len(result.critical_points)))
    assert points.loc[0, "energy"] == pytest.approx(result.critical_points[0].energy.total)


def test_record_solve_without_points(db):
    c = curve_to_dict(make_circle(1.0))
    run = runs.record_solve(db, [], c, c, RunConfig().as_dict())
    assert run.value is None
    assert runs.load_critical_points(db, run.id).empty


def test_record_and_load_sweep(db):
    c = curve_to_dict(make_circle(1.0))
    run = runs.record_sweep(db, _sweep_frame(), c, c, RunConfig().as_dict())
    sweep = runs.load_sweep(db, run.id)
    assert list(sweep["lambda"]) == [1.0, 2.0, 3.0]
    assert sweep.loc[2, "status"] == "failed"
    assert pd.isna(sweep.loc[2, "energy_best"])
    assert pd.isna(sweep.loc[2, "winding"])
    assert str(sweep["winding"].dtype) == "Int64"


def test_filter_runs_by_command(db):
    c = curve_to_dict(make_circle(1.0))
    runs.record_sweep(db, _sweep_frame(), c, c, {})
    runs.record_solve(db, [], c, c, {})
    assert list(runs.load_runs(db, "sweep")["command"]) == ["sweep"]
    assert len(runs.load_runs(db)) == 2


def test_missing_run(db):
    with pytest.raises(ValueError, match="Run 99 not found"):
        runs.load_sweep(db, 99)


def test_session_rolls_back_on_error(db_url):
    runs.init_db(db_url)
    c = curve_to_dict(make_circle(1.0))
    with pytest.raises(RuntimeError):
        with runs.get_session(db_url) as session:
            runs.record_solve(session, [], c, c, {})
            raise RuntimeError("boom")
    with runs.get_session(db_url) as session:
        assert runs.load_runs(session).empty


# ── audit report ──────────────────────────────────────────────────────────────

def test_winding_changes_skip_failed_rows():
    frame = pd.DataFrame(
        {
            "lambda": [1.0, 2.0, 3.0, 4.0, 5.0],
            "energy_best": [1.0, 2.0, np.nan, 4.0, 5.0],
            "winding": [0, 0, None, 1, 1],
            "branch_count": [1, 1, 0, 2, 2],
            "status": ["ok", "ok", "failed", "ok", "ok"],
        }
    ).astype({"winding": "Int64", "branch_count": "Int64"})
    changes = audit_runs.winding_changes(frame)
    assert list(changes["lambda"]) == [4.0]


def test_audit_report(db_url, capsys):
    runs.init_db(db_url)
    c = make_circle(1.0)
    cfg = RunConfig(grid=32)
    with runs.get_session(db_url) as session:
        runs.record_distance(session, distance(c, c, cfg), curve_to_dict(c), curve_to_dict(c), cfg.as_dict())
        runs.record_sweep(session, _sweep_frame(), curve_to_dict(c), curve_to_dict(c), cfg.as_dict())
    audit_runs.audit_runs(db_url)
    out = capsys.readouterr().out
    assert "Total runs: 2" in out
    assert "(3 steps, 1 failed)" in out
    assert "no change of winding number" in out
    assert "END OF REPORT" in out
