import json

import pytest

from hexmob.diaries import (
    AnchorNotFoundError,
    chain_stages,
    default_min_support,
    diary_to_dict,
    enrich,
    export_diary_json,
    load_attributes,
    mine_diary,
)
from hexmob.homework import HomeWorkMatrix, HomeWorkPair
from hexmob.ingest import IngestError, load_footfall
from hexmob.model import REGIME_INTERVALS

from conftest import H1, H2, H3, H4, H5, day, store_of, write_ff_csv

TUESDAYS = (3, 10, 17, 24)  # June 2025
THURSDAYS = (5, 12, 19, 26)
MONDAYS = (2, 9, 16, 23, 30)


def matrix(rows, pairs=((H1, H2),)):
    store = store_of(rows)
    hw = tuple(
        HomeWorkPair(home=h, work=w, qualifying_days=(day(3),)) for h, w in pairs
    )
    return HomeWorkMatrix(pairs=hw, flows=store, scope="hexes")


def commuter_day(dom, shop=True):
    rows = [(H1, H2, dom, 1), (H2, H2, dom, 2), (H2, H2, dom, 3),
            (H2, H2, dom, 4), (H2, H2, dom, 5)]
    if shop:
        rows += [(H2, H3, dom, 6), (H3, H1, dom, 7)]
    else:
        rows += [(H2, H1, dom, 6), (H1, H1, dom, 7)]
    rows.append((H1, H1, dom, 8))
    return rows


class TestChainStages:
    def test_single_record(self):
        M = matrix([(H1, H2, 3, 1)])
        stages = chain_stages(M, H1, 2)
        assert len(stages) == 8
        assert stages[0].flows == ((H1, H2, 1, 30),)
        assert all(s.flows == () for s in stages[1:])

    def test_planted_chain_reproduced(self):
        rows = []
        for dom in TUESDAYS:
            rows += commuter_day(dom)
        M = matrix(rows)
        stages = chain_stages(M, H1, 2)
        assert stages[0].flows == ((H1, H2, 1, 120),)
        assert stages[3].flows == ((H2, H2, 4, 120),)
        assert stages[5].flows == ((H2, H3, 6, 120),)
        assert stages[6].flows == ((H3, H1, 7, 120),)
        assert stages[7].flows == ((H1, H1, 8, 120),)

    def test_counts_sum_over_weekday_days_only(self):
        rows = [(H1, H2, dom, 1, "worker", 10) for dom in TUESDAYS]
        rows += [(H1, H2, dom, 1, "worker", 99) for dom in THURSDAYS]
        M = matrix(rows)
        stages = chain_stages(M, H1, 2)
        assert stages[0].flows == ((H1, H2, 1, 40),)

    def test_soundness_invariant(self):
        rows = []
        for dom in TUESDAYS:
            rows += commuter_day(dom, shop=(dom > 10))
        M = matrix(rows)
        stages = chain_stages(M, H1, 2)
        for i in range(1, 8):
            prev_dests = stages[i - 1].destinations()
            for o, _d, _iv, _c in stages[i].flows:
                assert o in prev_dests

    def test_stage1_intervals_restricted(self):
        rows = [(H1, H2, 3, 1), (H1, H3, 3, 2), (H1, H4, 3, 5)]
        M = matrix(rows)
        stages = chain_stages(M, H1, 2)
        assert {f[2] for f in stages[0].flows} == {1, 2}
        assert all(f[0] != H1 or f[2] != 5 for f in stages[0].flows)

    def test_full_day_rows_never_chained(self):
        rows = [(H1, H2, 3, 1), (H2, H3, 3, 9)]
        M = matrix(rows)
        stages = chain_stages(M, H1, 2)
        assert all(f[2] != 9 for s in stages for f in s.flows)

    def test_anchor_not_found(self):
        M = matrix([(H1, H2, 3, 1)])
        with pytest.raises(AnchorNotFoundError):
            chain_stages(M, H5, 2)

    def test_bad_weekday(self):
        M = matrix([(H1, H2, 3, 1)])
        with pytest.raises(ValueError):
            chain_stages(M, H1, 0)

    def test_chain_dies_without_dwell(self):
        # no records at intervals 2..5: once a stage is empty every later
        # stage is empty too, even though evening flows exist in the store
        rows = [(H1, H2, dom, 1) for dom in TUESDAYS]
        rows += [(H2, H1, dom, 6) for dom in TUESDAYS]
        M = matrix(rows)
        stages = chain_stages(M, H1, 2)
        assert stages[0].flows == ((H1, H2, 1, 120),)
        assert all(s.flows == () for s in stages[1:])


class TestMineDiary:
    def _planted(self):
        rows = []
        for dom in TUESDAYS:
            rows += commuter_day(dom)
        return matrix(rows)

    def test_planted_regime_itemsets(self):
        pat = mine_diary(self._planted(), H1, 2, min_support=4)
        by_regime = {name: {fs.items: fs.support for fs in sets}
                     for name, sets in pat.regime_patterns.items()}
        # the commute leg and the 08:00-09:59 work dwell both live in morning peak
        assert by_regime["morning_peak"] == {
            ((H1, H2, 1),): 4,
            ((H2, H2, 2),): 4,
            ((H1, H2, 1), (H2, H2, 2)): 4,
        }
        assert by_regime["midday"][((H2, H2, 3), (H2, H2, 4), (H2, H2, 5))] == 4
        assert by_regime["evening_peak"][((H2, H3, 6), (H3, H1, 7))] == 4
        assert by_regime["night"] == {((H1, H1, 8),): 4}

    def test_regime_consistency_invariant(self):
        pat = mine_diary(self._planted(), H1, 2, min_support=2)
        for name, sets in pat.regime_patterns.items():
            intervals = set(REGIME_INTERVALS[name])
            for fs in sets:
                assert {item[2] for item in fs.items} <= intervals

    def test_support_bound(self):
        pat = mine_diary(self._planted(), H1, 2, min_support=1)
        for sets in pat.regime_patterns.values():
            for fs in sets:
                assert fs.support <= len(TUESDAYS)

    def test_mining_uses_presence_not_counts(self):
        rows = []
        for dom in TUESDAYS:
            rows += commuter_day(dom)
        # huge-count flow on only two Tuesdays stays below min_support 3
        rows += [(H2, H4, dom, 6, "worker", 5000) for dom in TUESDAYS[:2]]
        pat = mine_diary(matrix(rows), H1, 2, min_support=3)
        evening = {fs.items for fs in pat.regime_patterns["evening_peak"]}
        assert all((H2, H4, 6) not in items for items in evening)
        pat2 = mine_diary(matrix(rows), H1, 2, min_support=2)
        evening2 = {fs.items for fs in pat2.regime_patterns["evening_peak"]}
        assert ((H2, H4, 6),) in evening2

    def test_thursday_particular_flow(self):
        rows = []
        for dom in THURSDAYS + MONDAYS:
            rows += commuter_day(dom, shop=False)
        rows += [(H2, H4, dom, 6, "worker", 40) for dom in THURSDAYS]
        rows += [(H2, H4, 2, 6, "worker", 40)]  # one Monday only
        M = matrix(rows)
        thu = mine_diary(M, H1, 4, min_support=2)
        mon = mine_diary(M, H1, 1, min_support=2)
        thu_items = {fs.items: fs.support for fs in thu.regime_patterns["evening_peak"]}
        mon_items = {it for fs in mon.regime_patterns["evening_peak"] for it in fs.items}
        assert thu_items[((H2, H4, 6),)] == 4
        assert (H2, H4, 6) not in mon_items

    def test_zero_data_weekday(self):
        rows = []
        for dom in TUESDAYS:
            rows += commuter_day(dom)
        pat = mine_diary(matrix(rows), H1, 7, min_support=2)  # Sundays: no data
        assert all(sets == () for sets in pat.regime_patterns.values())
        assert all(v == 0 for v in pat.intraflow_series.values())
        assert all(v == 0 for v in pat.inflow_series.values())

    def test_series(self):
        pat = mine_diary(self._planted(), H1, 2, min_support=2)
        assert pat.intraflow_series == {1: 0, 2: 0, 3: 0, 4: 0, 5: 0, 6: 0, 7: 0, 8: 120}
        assert pat.inflow_series == {1: 0, 2: 0, 3: 0, 4: 0, 5: 0, 6: 0, 7: 120, 8: 0}

    def test_default_min_support_formula(self):
        assert default_min_support(4) == 2
        assert default_min_support(5) == 3
        assert default_min_support(22) == 11
        assert default_min_support(0) == 2
        assert default_min_support(1) == 2

    def test_default_applied(self):
        pat = mine_diary(self._planted(), H1, 2)
        assert pat.min_support == 2  # four Tuesdays -> ceil(2) but floor of 2

    def test_enrichment_bags_initialized_empty(self):
        pat = mine_diary(self._planted(), H1, 2, min_support=2)
        assert set(pat.enrichment) == pat.mentioned_hexes()
        assert all(bag.footfall_mean == {} and bag.extra == {} for bag in pat.enrichment.values())


class TestEnrich:
    def _pattern(self):
        rows = []
        for dom in TUESDAYS:
            rows += commuter_day(dom)
        return mine_diary(matrix(rows), H1, 2, min_support=2)

    def test_footfall_mean_per_type(self, tmp_path):
        write_ff_csv(tmp_path / "ff.csv", [
            (H2, "2025-06-03", 1, "worker", 10),
            (H2, "2025-06-10", 1, "worker", 20),
            (H2, "2025-06-17", 1, "worker", 30),
            (H2, "2025-06-03", 1, "all", 7),
        ])
        ff = load_footfall(tmp_path / "ff.csv")
        pat = enrich(self._pattern(), ff=ff)
        assert pat.enrichment[H2].footfall_mean == {"worker": 20.0, "all": 7.0}

    def test_absent_hex_empty_bag(self, tmp_path):
        write_ff_csv(tmp_path / "ff.csv", [(H5, "2025-06-03", 1, "worker", 10)])
        ff = load_footfall(tmp_path / "ff.csv")
        pat = enrich(self._pattern(), ff=ff)
        assert pat.enrichment[H1].footfall_mean == {}

    def test_attrs_pass_through(self, tmp_path):
        attrs_file = tmp_path / "attrs.csv"
        attrs_file.write_text(f"{H3},poi,department store\n{H3},tag,retail\n{H5},poi,park\n")
        attrs = load_attributes(attrs_file)
        pat = enrich(self._pattern(), attrs=attrs)
        assert pat.enrichment[H3].extra == {"poi": "department store", "tag": "retail"}
        assert H5 not in pat.enrichment  # only mentioned hexes get bags

    def test_attrs_header_row_allowed(self, tmp_path):
        attrs_file = tmp_path / "attrs.csv"
        attrs_file.write_text(f"hex,key,value\n{H3},poi,cafe\n")
        assert load_attributes(attrs_file) == {H3: {"poi": "cafe"}}

    def test_malformed_attrs_names_row(self, tmp_path):
        attrs_file = tmp_path / "attrs.csv"
        attrs_file.write_text(f"{H3},poi,cafe\nnot-a-hex,poi,cafe\n")
        with pytest.raises(IngestError, match="line 2.*malformed hex id"):
            load_attributes(attrs_file)

    def test_wrong_field_count(self, tmp_path):
        attrs_file = tmp_path / "attrs.csv"
        attrs_file.write_text(f"{H3},poi\n")
        with pytest.raises(IngestError, match="line 1.*expected 3 fields"):
            load_attributes(attrs_file)


class TestExport:
    def _pattern(self):
        rows = []
        for dom in TUESDAYS:
            rows += commuter_day(dom)
        return mine_diary(matrix(rows), H1, 2, min_support=2)

    def test_schema_keys(self):
        doc = diary_to_dict(self._pattern())
        assert set(doc) == {"anchor", "weekday", "days", "min_support", "stages",
                            "regimes", "intraflow", "inflow", "enrichment"}
        assert doc["anchor"] == H1
        assert doc["days"] == ["2025-06-03", "2025-06-10", "2025-06-17", "2025-06-24"]
        assert len(doc["stages"]) == 8
        assert doc["stages"][0]["flows"][0] == {
            "origin": H1, "destination": H2, "interval": 1, "count": 120,
        }
        assert set(doc["regimes"]) == {"morning_peak", "midday", "evening_peak", "night"}

    def test_byte_stable(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        export_diary_json(self._pattern(), a)
        export_diary_json(self._pattern(), b)
        assert a.read_bytes() == b.read_bytes()
        json.loads(a.read_text())  # well-formed
