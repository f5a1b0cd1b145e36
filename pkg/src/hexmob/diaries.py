"""Artificial travel diaries: chain flows outward from an anchor hex across
the day's intervals, mine the frequent per-weekday flow patterns per temporal
regime, and enrich the mentioned hexes with footfall means and attributes.

A flow here is a plain (origin, destination, interval, count) tuple; dropping
the count gives the item mined by eclat. Chains run over intervals 1..8 only:
a stage's flows must start where some previous-stage flow ended, and dwell
self-loops are what let a chain survive a quiet interval.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace

from .homework import HomeWorkMatrix
from .ingest import FootfallStore, IngestError
from .mining import Transaction, eclat
from .model import (
    FOOTFALL_USER_TYPES,
    REGIMES,
    SUB_DAY_INTERVALS,
    is_hex_id,
    weekday_dates,
)


class AnchorNotFoundError(KeyError):
    """The requested anchor hex is not part of any detected pair."""


@dataclass(frozen=True)
class ChainStage:
    """Flows reachable at one interval; stage 1 covers intervals 1 and 2."""

    stage_index: int
    flows: tuple  # of (origin, destination, interval, count)

    def destinations(self) -> set:
        return {f[1] for f in self.flows}


@dataclass(frozen=True)
class AttributeBag:
    footfall_mean: dict
    extra: dict

    @classmethod
    def empty(cls) -> "AttributeBag":
        return cls(footfall_mean={}, extra={})


@dataclass(frozen=True)
class DiaryPattern:
    anchor: str
    weekday: int
    days: tuple
    min_support: int
    stages: tuple
    regime_patterns: dict  # regime name -> tuple of FrequentItemset
    intraflow_series: dict  # interval 1..8 -> count over the weekday's days
    inflow_series: dict  # interval 1..8 -> count into anchor, self-loop excluded
    enrichment: dict  # hex -> AttributeBag

    def mentioned_hexes(self) -> set:
        out = set()
        for itemsets in self.regime_patterns.values():
            for fs in itemsets:
                for o, d, _ in fs.items:
                    out.add(o)
                    out.add(d)
        return out


def _check_anchor(M: HomeWorkMatrix, anchor: str) -> None:
    if anchor not in M.pair_hexes():
        raise AnchorNotFoundError(f"anchor {anchor!r} is not a hex of any detected pair")


def chain_stages(M: HomeWorkMatrix, anchor: str, weekday: int) -> list[ChainStage]:
    """Eight stages of flows chained from the anchor on one weekday.

    Stage 1: flows leaving the anchor at intervals 1 or 2 on the weekday's
    days, counts summed across those days. Stage i (2..8): interval-i flows
    whose origin is a destination of stage i-1. Stages may be empty once a
    chain dies out; the list always has 8 entries.
    """
    _check_anchor(M, anchor)
    if not 1 <= weekday <= 7:
        raise ValueError("weekday must be 1..7")
    store = M.flows
    days = [] if store.year is None else weekday_dates(store.year, store.month, weekday)

    def collect(origins, intervals) -> dict:
        acc: dict = {}
        for day in days:
            for iv in intervals:
                for origin in origins:
                    for r in store.rows_by_origin(day, iv, origin):
                        key = (origin, store.hex_ids[store.dest_code[r]], iv)
                        acc[key] = acc.get(key, 0) + int(store.count[r])
        return acc

    stages = []
    acc = collect([anchor], (1, 2))
    stages.append(ChainStage(1, tuple(sorted((o, d, iv, c) for (o, d, iv), c in acc.items()))))
    for iv in range(2, 9):
        prev_dests = sorted(stages[-1].destinations())
        acc = collect(prev_dests, (iv,))
        stages.append(ChainStage(iv, tuple(sorted((o, d, i, c) for (o, d, i), c in acc.items()))))
    return stages


def default_min_support(n_weekday_days: int) -> int:
    """Half the weekday's occurrences, rounded up, but never below 2."""
    return max(2, math.ceil(0.5 * n_weekday_days))


def mine_diary(
    M: HomeWorkMatrix,
    anchor: str,
    weekday: int,
    min_support: int | None = None,
) -> DiaryPattern:
    """Frequent flow patterns around one anchor on one weekday, per regime.

    Each temporal regime gets its own transaction database: a transaction is
    one calendar day of the weekday, its items the chained flows (origin,
    destination, interval) actually present that day with interval in the
    regime. Counts feed the intraflow/inflow series, not the mining.
    """
    stages = chain_stages(M, anchor, weekday)
    store = M.flows
    days = () if store.year is None else tuple(weekday_dates(store.year, store.month, weekday))
    if min_support is None:
        min_support = default_min_support(len(days))
    if min_support < 1:
        raise ValueError("min_support must be >= 1")

    all_items = sorted({f[:3] for st in stages for f in st.flows})
    regime_patterns: dict = {}
    for name, regime in REGIMES.items():
        universe = [it for it in all_items if it[2] in regime.intervals]
        txns = []
        for day in days:
            present = frozenset(
                it for it in universe if store.has_flow(it[0], it[1], day, it[2])
            )
            if present:
                txns.append(Transaction(id=day, items=present))
        regime_patterns[name] = tuple(eclat(txns, min_support))

    intraflow = {iv: 0 for iv in SUB_DAY_INTERVALS}
    inflow = {iv: 0 for iv in SUB_DAY_INTERVALS}
    anchor_code = store.hex_code(anchor)
    for day in days:
        for iv in SUB_DAY_INTERVALS:
            for r in store.rows_by_destination(day, iv, anchor):
                if int(store.origin_code[r]) == anchor_code:
                    intraflow[iv] += int(store.count[r])
                else:
                    inflow[iv] += int(store.count[r])

    pattern = DiaryPattern(
        anchor=anchor,
        weekday=weekday,
        days=days,
        min_support=min_support,
        stages=tuple(stages),
        regime_patterns=regime_patterns,
        intraflow_series=intraflow,
        inflow_series=inflow,
        enrichment={},
    )
    enrichment = {h: AttributeBag.empty() for h in sorted(pattern.mentioned_hexes())}
    return replace(pattern, enrichment=enrichment)


def load_attributes(path) -> dict:
    """Parse a `hex,key,value` attribute CSV into hex -> {key: value}.

    A leading literal `hex,key,value` header row is allowed and skipped.
    """
    out: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for n, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if n == 1 and row == ["hex", "key", "value"]:
                continue
            if len(row) != 3:
                raise IngestError(f"expected 3 fields, got {len(row)}", line=n)
            h, key, value = row
            if not is_hex_id(h):
                raise IngestError(f"malformed hex id: {h!r}", line=n)
            out.setdefault(h, {})[key] = value
    return out


def enrich(
    pattern: DiaryPattern,
    ff: FootfallStore | None = None,
    attrs: dict | None = None,
) -> DiaryPattern:
    """Fill each mentioned hex's bag with footfall means per user type and
    any extra attributes; hexes absent from the footfall data keep empty bags."""
    enrichment = {}
    for h in sorted(pattern.mentioned_hexes()):
        means = {}
        if ff is not None:
            for ut in FOOTFALL_USER_TYPES:
                m = ff.mean_daily_count(h, ut)
                if m is not None:
                    means[ut] = m
        extra = dict((attrs or {}).get(h, {}))
        enrichment[h] = AttributeBag(footfall_mean=means, extra=extra)
    return replace(pattern, enrichment=enrichment)


def diary_to_dict(pattern: DiaryPattern) -> dict:
    """JSON-ready form of a diary; key order and layout are stable."""
    return {
        "anchor": pattern.anchor,
        "weekday": pattern.weekday,
        "days": [d.isoformat() for d in pattern.days],
        "min_support": pattern.min_support,
        "stages": [
            {
                "stage": st.stage_index,
                "flows": [
                    {"origin": o, "destination": d, "interval": iv, "count": c}
                    for o, d, iv, c in st.flows
                ],
            }
            for st in pattern.stages
        ],
        "regimes": {
            name: [
                {"items": [list(item) for item in fs.items], "support": fs.support}
                for fs in itemsets
            ]
            for name, itemsets in pattern.regime_patterns.items()
        },
        "intraflow": {str(iv): c for iv, c in sorted(pattern.intraflow_series.items())},
        "inflow": {str(iv): c for iv, c in sorted(pattern.inflow_series.items())},
        "enrichment": {
            h: {"footfall_mean": bag.footfall_mean, "extra": bag.extra}
            for h, bag in sorted(pattern.enrichment.items())
        },
    }


def export_diary_json(pattern: DiaryPattern, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(diary_to_dict(pattern), fh, sort_keys=True, indent=2)
        fh.write("\n")
