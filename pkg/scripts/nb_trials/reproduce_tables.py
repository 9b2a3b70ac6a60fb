#!/usr/bin/env python
"""Regenerate the design tables and compare them with the published values."""

import sys
import time
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

import pandas as pd

from backend.nb_trials.cli.config_loader import TableName
from backend.nb_trials.cli.tables import build_tables, max_abs_gap, write_tables
from backend.nb_trials.core.config import settings

SIZE_COLUMNS = ("n_zr", "n_rl", "n_r", "n_ru", "n_dl", "n_d", "n_du")


def compare(name: str, ours: pd.DataFrame, published: pd.DataFrame) -> bool:
    """Print column-by-column agreement; True when every size matches exactly."""
    ok = True
    for column in SIZE_COLUMNS:
        if column not in published:
            continue
        mismatches = int((ours[column].reset_index(drop=True) != published[column]).sum())
        status = "✅" if mismatches == 0 else "❌"
        print(f"  {status} {column:.<8} {mismatches} of {len(published)} rows differ")
        ok &= mismatches == 0
    if "md0" in published:
        gap = max_abs_gap(ours["md0"], published["md0"])
        print(f"  {'✅' if gap <= 5e-5 else '❌'} md0..... max gap {gap:.2e}")
        ok &= gap <= 5e-5
    return ok


def main():
    which = TableName(sys.argv[1]) if len(sys.argv) > 1 else TableName.ALL

    print("=" * 70)
    print("📊 Regenerating design tables")
    print("=" * 70)

    start = time.perf_counter()
    tables = build_tables(which)
    elapsed = time.perf_counter() - start
    print(f"Built {len(tables)} table(s) in {elapsed:.2f}s")

    for path in write_tables(tables, settings.tables_dir):
        print(f"   wrote {path}")

    all_ok = True
    for name, frame in tables.items():
        published_path = settings.paper_tables_dir / f"{name.replace('-', '_')}.csv"
        print(f"\n{name}:")
        if not published_path.exists():
            print(f"  ⚠️ no published table at {published_path}")
            continue
        all_ok &= compare(name, frame, pd.read_csv(published_path))

    print("\n" + "=" * 70)
    print("✅ All tables match" if all_ok else "❌ Some columns differ")
    print("=" * 70)
    sys.exit(0 if all_ok else 1)


if __name__ == "__main__":
    main()
