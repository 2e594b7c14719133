from __future__ import annotations

import pytest

from roadplan import (
    CloseRoad,
    Demand,
    ParseError,
    SessionError,
    SetCapacity,
    StructuralError,
    apply_modification,
    create_tree,
    delete_state,
)
from roadplan.datasets import dataset_files, load_dataset
from roadplan.ingest import (
    apply_coords,
    load_session,
    parse_coords,
    parse_network,
    parse_trips,
    save_session,
    serialize_network,
)
from roadplan.statetree import BuildRoad

NET = """\
<NUMBER OF NODES> 3
<NUMBER OF LINKS> 2
<END OF METADATA>
~ header comment
1 2 1200 2.5 4 0.15 4 0 0 1 ;
2 3 800 0 6 0.15 4 0 0 1 ;
"""

TRIPS = """\
<TOTAL OD FLOW> 60.0
<END OF METADATA>
Origin 1
2 : 10.0; 3 : 30.0;
Origin 2
1 : 0.0; 3 : 20.0;
"""

COORDS = """\
Node X Y ;
1 0.0 0.0 ;
2 0.5 0.0 ;
3 1.0 0.5 ;
"""


class TestParseNetwork:
    def test_basic(self):
        net = parse_network(NET)
        assert sorted(net.nodes) == [1, 2, 3]
        assert net.roads[1].capacity == 1200.0
        assert net.roads[1].fftt == 4.0
        assert net.roads[1].length_km == 2.5
        assert net.roads[2].length_km is None  # zero length column -> derive

    def test_count_mismatch(self):
        bad = NET.replace("<NUMBER OF LINKS> 2", "<NUMBER OF LINKS> 5")
        with pytest.raises(ParseError, match="declared 5 links but parsed 2"):
            parse_network(bad)

    def test_nonpositive_capacity_names_line(self):
        bad = NET.replace("1 2 1200", "1 2 0")
        with pytest.raises(ParseError, match="line 5"):
            parse_network(bad)

    def test_malformed_row(self):
        bad = NET.replace("2 3 800 0 6", "2 3 eight 0 6")
        with pytest.raises(ParseError, match="line 6"):
            parse_network(bad)

    def test_missing_metadata(self):
        with pytest.raises(ParseError, match="metadata"):
            parse_network("1 2 100 1 1 0.15 4 0 0 1 ;")

    def test_endpoint_outside_range(self):
        bad = NET.replace("2 3 800", "2 9 800")
        with pytest.raises(ParseError, match="outside node range"):
            parse_network(bad)

    def test_roundtrip_through_serializer(self):
        net = parse_network(NET)
        again = parse_network(serialize_network(net))
        keyed = lambda n: sorted(
            (r.from_node, r.to_node, r.capacity, r.fftt, r.length_km)
            for r in n.roads.values()
        )
        assert keyed(again) == keyed(net)


class TestParseTrips:
    def test_basic(self):
        demands = parse_trips(TRIPS)
        assert demands == [Demand(1, 2, 10.0), Demand(1, 3, 30.0), Demand(2, 3, 20.0)]

    def test_zero_entries_dropped(self):
        text = "<TOTAL OD FLOW> 0.0\n<END OF METADATA>\nOrigin 1\n2 : 0.0;\n"
        assert parse_trips(text) == []

    def test_self_pair_dropped_with_warning(self, caplog):
        text = "<TOTAL OD FLOW> 7.0\n<END OF METADATA>\nOrigin 1\n1 : 7.0;\n"
        with caplog.at_level("WARNING", logger="roadplan"):
            assert parse_trips(text) == []
        assert "self-pair" in caplog.text

    def test_total_mismatch(self):
        bad = TRIPS.replace("60.0", "99.0")
        with pytest.raises(ParseError, match="header declares"):
            parse_trips(bad)

    def test_malformed_entry(self):
        bad = TRIPS.replace("2 : 10.0;", "2 = 10.0;")
        with pytest.raises(ParseError, match="malformed demand entry"):
            parse_trips(bad)


class TestParseCoords:
    def test_basic(self):
        coords = parse_coords(COORDS)
        assert coords == {1: (0.0, 0.0), 2: (0.5, 0.0), 3: (1.0, 0.5)}

    def test_duplicate_node(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_coords(COORDS + "2 9 9 ;\n")

    def test_apply_lonlat(self):
        net = parse_network(NET)
        out = apply_coords(net, parse_coords(COORDS), "lonlat")
        assert out.nodes[3].lon == 1.0
        assert out.nodes[3].lat == 0.5

    def test_apply_planar_maps_into_small_box(self):
        net = parse_network(NET)
        out = apply_coords(net, {1: (0, 0), 2: (50000, 0), 3: (100000, 50000)}, "planar")
        lons = [n.lon for n in out.nodes.values()]
        lats = [n.lat for n in out.nodes.values()]
        assert max(lons) - min(lons) < 0.2
        assert max(lats) - min(lats) < 0.2
        # aspect preserved: x-extent is twice the y-extent, in km
        from roadplan import haversine_km

        width = haversine_km(min(lons), out.nodes[1].lat, max(lons), out.nodes[1].lat)
        assert width == pytest.approx(7.0, rel=1e-3)

    def test_missing_node_listed(self):
        net = parse_network(NET)
        with pytest.raises(StructuralError, match=r"\[3\]"):
            apply_coords(net, {1: (0, 0), 2: (1, 1)}, "lonlat")

    def test_bad_projection(self):
        net = parse_network(NET)
        with pytest.raises(StructuralError, match="projection"):
            apply_coords(net, parse_coords(COORDS), "mercator")


class TestDatasets:
    def test_braess_counts(self):
        net, demands = load_dataset("braess")
        assert len(net.nodes) == 4
        assert len(net.roads) == 5
        assert demands == [Demand(1, 4, 1000.0)]

    def test_siouxfalls_counts(self):
        net, demands = load_dataset("siouxfalls")
        assert len(net.nodes) == 24
        assert len(net.roads) == 76
        assert len(demands) == 552
        assert sum(d.trips for d in demands) == pytest.approx(360600.0)
        # the congested two-way pair between nodes 6 and 8
        assert net.roads[16].from_node == 6 and net.roads[16].to_node == 8
        assert net.roads[19].from_node == 8 and net.roads[19].to_node == 6
        assert net.roads[16].capacity == 4800.0
        assert net.roads[19].capacity == 4800.0

    def test_unknown_dataset(self):
        with pytest.raises(KeyError):
            dataset_files("nowhere")


def small_tree():
    net, demands = load_dataset("braess")
    tree = create_tree(net, demands)
    a = apply_modification(tree, 0, CloseRoad(road=3))
    apply_modification(tree, a, SetCapacity(road=1, capacity=1200.0))
    apply_modification(
        tree, 0, BuildRoad(1, 4, two_way=True, road_kind="tunnel")
    )
    return tree


class TestSession:
    def test_round_trip_bytes(self):
        tree = small_tree()
        text = save_session(tree)
        loaded = load_session(text)
        assert save_session(loaded) == text
        assert text.endswith("\n")
        assert "\r" not in text

    def test_round_trip_preserves_structure(self):
        tree = small_tree()
        loaded = load_session(save_session(tree))
        assert sorted(loaded.nodes) == sorted(tree.nodes)
        for sid in tree.nodes:
            assert loaded.nodes[sid].metric == pytest.approx(tree.nodes[sid].metric, rel=1e-9)
            assert loaded.nodes[sid].network == tree.nodes[sid].network
        assert loaded.next_state_id == tree.next_state_id
        assert loaded.demands == tree.demands

    def test_round_trip_after_deletion_keeps_id_gaps(self):
        tree = small_tree()
        delete_state(tree, 1)  # removes states 1 and 2
        loaded = load_session(save_session(tree))
        assert sorted(loaded.nodes) == sorted(tree.nodes)
        assert loaded.next_state_id == tree.next_state_id

    def test_truncated_document(self):
        text = save_session(small_tree())
        with pytest.raises(SessionError, match="invalid session JSON"):
            load_session(text[: len(text) // 2])

    def test_schema_version_mismatch(self):
        text = save_session(small_tree()).replace('"schema_version":1', '"schema_version":2')
        with pytest.raises(SessionError, match="schema_version"):
            load_session(text)

    def test_broken_parent_reference(self):
        tree = small_tree()
        text = save_session(tree)
        broken = text.replace('"parent":1', '"parent":77')
        with pytest.raises(SessionError, match="missing parent"):
            load_session(broken)

    def test_tampered_metric_rejected(self):
        tree = small_tree()
        text = save_session(tree)
        metric = tree.nodes[1].metric
        broken = text.replace(f"{metric:.17g}", f"{metric * 1.5:.17g}")
        with pytest.raises(SessionError):
            load_session(broken)
