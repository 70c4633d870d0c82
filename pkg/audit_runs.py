"""
Run Store Audit Report

Lists every stored distance / solve-bvp run with its critical points and every
λ sweep with the rows where the winding number of the best branch changes.

Usage:
  Set CURVEDIST_DATABASE_URL (or DATABASE_URL) or pass a URL and run:
  python audit_runs.py [URL]
"""

import sys
from collections import defaultdict

import pandas as pd

from runs import get_database_url, get_session, init_db, load_critical_points, load_runs, load_sweep


def winding_changes(sweep: pd.DataFrame) -> pd.DataFrame:
    """Rows whose winding differs from the previous successful row."""
    ok = sweep[sweep["status"] == "ok"]
    previous = ok["winding"].shift()
    changed = ok["winding"].ne(previous).fillna(False).astype(bool) & previous.notna()
    return ok[changed]


def audit_runs(url=None):
    """Print the run-store audit report."""
    print(f"Reading runs from {get_database_url(url)}")
    init_db(url)

    with get_session(url) as db:
        runs = load_runs(db)

        if runs.empty:
            print("No runs recorded.")
            return

        print("=" * 80)
        print("CURVE DISTANCE RUN AUDIT REPORT")
        print("=" * 80)
        counts = defaultdict(int)
        for command in runs["command"]:
            counts[command] += 1
        print(f"\nTotal runs: {len(runs)}")
        for command, count in sorted(counts.items()):
            print(f"  {command}: {count}")

        for run in runs.itertuples(index=False):
            print(f"\n{'=' * 80}")
            print(f"RUN {run.id} - {run.command} - {run.created_at}")
            print(f"  curves: {run.curve1} vs {run.curve2}")
            print("=" * 80)

            if run.command == "sweep":
                sweep = load_sweep(db, run.id)
                failed = int((sweep["status"] == "failed").sum())
                print(f"  lambda range: {sweep['lambda'].min():g} - {sweep['lambda'].max():g} "
                      f"({len(sweep)} steps, {failed} failed)")
                changes = winding_changes(sweep)
                if changes.empty:
                    print("  no change of winding number along the sweep")
                for row in changes.to_dict("records"):
                    print(f"  winding -> {row['winding']} at lambda_1 = {row['lambda']:g}, "
                          f"E = {row['energy_best']:.6g}")
                continue

            agree = "" if pd.isna(run.agree) else ("agree" if run.agree else "DISAGREE")
            print(f"  value: {run.value:.12g}  method: {run.method} {agree}")
            points = load_critical_points(db, run.id)
            for point in points.to_dict("records"):
                winding = "" if pd.isna(point["winding"]) else f"  winding {int(point['winding'])}"
                print(f"    #{point['rank']}: E = {point['energy']:.12g}  residual {point['residual']:.2e}"
                      f"  start {point['start_index']}{winding}")

        print(f"\n{'=' * 80}")
        print("END OF REPORT")
        print("=" * 80)


if __name__ == "__main__":
    audit_runs(sys.argv[1] if len(sys.argv) > 1 else None)
