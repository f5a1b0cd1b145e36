import csv
import datetime as dt
import random

import pytest

from hexmob.ingest import ODStore
from hexmob.model import FlowRecord

YEAR, MONTH = 2025, 6  # a 30-day month; 2025-06-01 is a Sunday

# short aliases for readable fixtures; all valid 15-char ids
H1 = "aaaaaaaaaaaaaa1"
H2 = "aaaaaaaaaaaaaa2"
H3 = "aaaaaaaaaaaaaa3"
H4 = "aaaaaaaaaaaaaa4"
H5 = "aaaaaaaaaaaaaa5"


def day(d: int) -> dt.date:
    return dt.date(YEAR, MONTH, d)


def rec(o, d, dom, iv, ut="worker", c=30) -> FlowRecord:
    return FlowRecord(origin=o, destination=d, day=day(dom), interval=iv, user_type=ut, count=c)


def store_of(rows) -> ODStore:
    """Rows as (origin, dest, day-of-month, interval[, user_type[, count]])."""
    return ODStore.from_records(rec(*r) for r in rows)


def as_tuples(records):
    return [(r.origin, r.destination, r.day, r.interval, r.user_type, r.count) for r in records]


def write_od_csv(path, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["origin_hex", "destination_hex", "date", "interval", "user_type", "count"])
        for r in records:
            w.writerow([r.origin, r.destination, r.day.isoformat(), r.interval, r.user_type, r.count])


def write_ff_csv(path, rows):
    """Rows as (hex, date, interval, user_type, count)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hex", "date", "interval", "user_type", "count"])
        for row in rows:
            w.writerow(list(row))


def random_records(rng: random.Random, n_hexes=12, n_days=30, flows_per_day=20):
    """Duplicate-free random worker records across intervals 1..8.

    Self-loops included; counts small. Used for oracle-equivalence sweeps.
    """
    hexes = [f"{i:015x}" for i in rng.sample(range(16**6), n_hexes)]
    records = []
    for dom in range(1, n_days + 1):
        seen = set()
        for _ in range(flows_per_day):
            o = rng.choice(hexes)
            d = rng.choice(hexes)
            iv = rng.randint(1, 8)
            if (o, d, iv) in seen:
                continue
            seen.add((o, d, iv))
            records.append(rec(o, d, dom, iv, c=rng.randint(1, 60)))
    return records


@pytest.fixture
def commute_showcase_records():
    """Mock-up of the reversal rule's showcase: H1 commutes to H2, H4 and H5
    with clean evening returns, while the H3 return already happens midday."""
    records = []
    for dom in range(2, 14):  # 12 days
        records += [
            rec(H1, H2, dom, 1), rec(H2, H1, dom, 6),
            rec(H1, H4, dom, 2), rec(H4, H1, dom, 7),
            rec(H1, H5, dom, 1), rec(H5, H1, dom, 6),
            # H3: evening return exists, but so does the midday one
            rec(H1, H3, dom, 1), rec(H3, H1, dom, 3), rec(H3, H1, dom, 6),
        ]
    return records
