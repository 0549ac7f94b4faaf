"""Writes the ingestion fixtures and their expected outputs.

Each fixture directory holds the inputs and expected_*.csv files with the
rows (no '#' header lines) the pipeline must produce.
"""

import math
import os
from datetime import datetime, timedelta

HERE = os.path.dirname(os.path.abspath(__file__))
KM_PER_DEG = 6371.0088 * math.pi / 180.0


def write(path, header, rows):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


def hours(start, n):
    t = datetime.strptime(start, "%Y-%m-%d %H:%M")
    return [(t + timedelta(hours=i)).strftime("%Y-%m-%d %H:%M") for i in range(n)]


def boundary():
    d = os.path.join(HERE, "boundary")
    rows = []
    # S1: complete June 2001 (09:00-based days) with one spike, plus an
    # 08:59 reading on 1 June that belongs to the 31 May day.
    rows.append(("S1", "2001-06-01 08:59", 60.0))
    for ts in hours("2001-06-01 09:00", 30 * 24):
        rows.append(("S1", ts, 42.0 if ts == "2001-06-15 13:00" else 1.0))
    # S2: complete June plus 08:59 on 1 July (still the 30 June day) and
    # 09:00 on 1 July (first July day).
    for ts in hours("2001-06-01 09:00", 30 * 24):
        rows.append(("S2", ts, 1.0))
    rows.append(("S2", "2001-07-01 08:59", 50.0))
    rows.append(("S2", "2001-07-01 09:00", 70.0))
    write(os.path.join(d, "hourly.csv"), ["site_id", "timestamp", "precip_mm"], rows)
    write(os.path.join(d, "expected_maxima.csv"), ["site_id", "month", "year", "maximum"],
          [("S1", 6, 2001, 42), ("S2", 6, 2001, 50)])
    write(os.path.join(d, "expected_omitted.csv"), ["site_id", "year", "month", "observed_days", "days_in_month"],
          [("S1", 2001, 5, 1, 31), ("S2", 2001, 7, 1, 31)])


def coverage():
    d = os.path.join(HERE, "coverage")
    rows = []
    # C1: 23 of 30 June days observed (76.7%), rows for the rest absent.
    for ts in hours("2001-06-01 09:00", 23 * 24):
        rows.append(("C1", ts, 2.0))
    # C2: 24 of 30 days (exactly 80%).
    for ts in hours("2001-06-01 09:00", 24 * 24):
        rows.append(("C2", ts, 7.5 if ts == "2001-06-20 02:00" else 3.0))
    # C3: rows for all 30 days, but days 24..30 carry only sentinels.
    for i, ts in enumerate(hours("2001-06-01 09:00", 30 * 24)):
        day = i // 24
        if day < 23:
            v = 4.0
        elif day == 23:
            v = ""
        else:
            v = -999
        rows.append(("C3", ts, v))
    # C4: a missing hour inside an otherwise observed day does not matter.
    for i, ts in enumerate(hours("2001-06-01 09:00", 30 * 24)):
        rows.append(("C4", ts, -999 if i % 24 == 5 else 0.5))
    write(os.path.join(d, "hourly.csv"), ["site_id", "timestamp", "precip_mm"], rows)
    write(os.path.join(d, "expected_maxima.csv"), ["site_id", "month", "year", "maximum"],
          [("C2", 6, 2001, 7.5), ("C4", 6, 2001, 0.5)])
    write(os.path.join(d, "expected_omitted.csv"), ["site_id", "year", "month", "observed_days", "days_in_month"],
          [("C1", 2001, 6, 23, 30), ("C3", 2001, 6, 23, 30)])


def station_rows(specs):
    """specs: (id, lon, lat, span_hours, missing_hours)."""
    meta, rows, expect = [], [], []
    for sid, lon, lat, span, missing in specs:
        meta.append((sid, lon, lat, 500))
        # Missing hours sit strictly inside the span so it is unchanged.
        gaps = set(range(1, 1 + missing))
        for i, ts in enumerate(hours("2002-01-01 00:00", span)):
            if i not in gaps:
                rows.append((sid, ts, 0.5))
        expect.append((sid, span, missing))
    return meta, rows, expect


def exclusion():
    d = os.path.join(HERE, "exclusion")
    specs = [("E1", 8.0, 46.0, 100, 0), ("E2", 9.0, 46.0, 100, 20), ("E3", 10.0, 46.0, 100, 21),
             ("E4", 11.0, 46.0, 100, 25)]
    meta, rows, expect = station_rows(specs)
    write(os.path.join(d, "stations.csv"), ["site_id", "lon", "lat", "alt_m"], meta)
    write(os.path.join(d, "hourly.csv"), ["site_id", "timestamp", "precip_mm"], rows)
    status = {"E1": "modelled", "E2": "modelled", "E3": "excluded", "E4": "excluded"}
    screened = []
    for (sid, lon, lat, alt), (_, span, missing) in zip(meta, expect):
        screened.append((sid, repr(float(lon)).rstrip("0").rstrip("."), repr(float(lat)).rstrip("0").rstrip("."),
                         alt, repr(span / (24.0 * 365.25)), repr(1.0 - (span - missing) / span) if missing else 0,
                         status[sid]))
    write(os.path.join(d, "expected_screened.csv"),
          ["site_id", "lon", "lat", "alt_m", "record_years", "missing_fraction", "status"], screened)


def dedup():
    d = os.path.join(HERE, "dedup")
    lat0 = 46.0
    dlon = 5.1 / (KM_PER_DEG * math.cos(math.radians(lat0)))
    specs = [("D1", 10.0, lat0, 400, 0),
             ("D2", 10.0, round(lat0 + 3.0 / KM_PER_DEG, 6), 200, 0),
             ("D3", 10.0, round(lat0 - 4.9 / KM_PER_DEG, 6), 300, 0),
             ("D4", round(10.0 + dlon, 6), lat0, 100, 0)]
    meta, rows, _ = station_rows(specs)
    write(os.path.join(d, "stations.csv"), ["site_id", "lon", "lat", "alt_m"], meta)
    write(os.path.join(d, "hourly.csv"), ["site_id", "timestamp", "precip_mm"], rows)
    status = {"D1": "modelled", "D2": "test", "D3": "test", "D4": "modelled"}
    write(os.path.join(d, "expected_status.csv"), ["site_id", "status"], [(s[0], status[s[0]]) for s in specs])
    write(os.path.join(d, "expected_modelled.csv"), ["site_id"],
          [(m[0],) for m in meta if status[m[0]] == "modelled"])


if __name__ == "__main__":
    boundary()
    coverage()
    exclusion()
    dedup()
