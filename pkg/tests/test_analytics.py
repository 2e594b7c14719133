from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roadplan import (
    CloseRoad,
    Demand,
    SetCapacity,
    StructuralError,
    UnknownIdError,
    apply_modification,
    create_tree,
)
from roadplan.analytics import (
    INDICATOR_NAMES,
    cell_statuses,
    compute_indicators,
    filter_and_rank,
    histogram,
    od_through_road,
)
from roadplan.datasets import load_dataset

from conftest import make_network


@pytest.fixture(scope="module")
def braess_tree():
    net, demands = load_dataset("braess")
    tree = create_tree(net, demands)
    closed = apply_modification(tree, 0, CloseRoad(road=3))
    return tree, closed


class TestIndicators:
    def test_single_state_scopes_are_zero(self, braess_tree):
        tree, _ = braess_tree
        inds = compute_indicators(tree, {0})
        assert len(inds) == 5
        for ind in inds:
            assert ind.scope_flow == 0.0
            assert ind.scope_time == 0.0
            assert ind.states_present == 1
            status = tree.nodes[0].assignment.statuses[ind.road]
            assert ind.avg_flow == status.actual_volume
            assert 0.0 < ind.avg_fftt_time_ratio <= 1.0

    def test_two_states_averages_and_scopes(self, braess_tree):
        tree, closed = braess_tree
        inds = {i.road: i for i in compute_indicators(tree, {0, closed})}
        # road 3 exists only in the base state
        assert inds[3].states_present == 1
        assert inds[3].scope_flow == 0.0
        v0 = tree.nodes[0].assignment.statuses[1].actual_volume
        v1 = tree.nodes[closed].assignment.statuses[1].actual_volume
        assert inds[1].avg_flow == pytest.approx((v0 + v1) / 2)
        assert inds[1].scope_flow == pytest.approx(abs(v0 - v1))

    def test_validation(self, braess_tree):
        tree, _ = braess_tree
        with pytest.raises(StructuralError):
            compute_indicators(tree, set())
        with pytest.raises(UnknownIdError):
            compute_indicators(tree, {99})


class TestFilterAndRank:
    def test_no_filters_returns_permutation(self, braess_tree):
        tree, closed = braess_tree
        inds = compute_indicators(tree, {0, closed})
        out = filter_and_rank(inds, {}, "scope_flow_cap_ratio", descending=True)
        assert sorted(out) == [1, 2, 3, 4, 5]

    def test_range_filter_inclusive(self, braess_tree):
        tree, _ = braess_tree
        inds = compute_indicators(tree, {0})
        flows = {i.road: i.avg_flow for i in inds}
        lo = min(flows.values())
        out = filter_and_rank(inds, {"avg_flow": (lo, lo)}, "avg_flow", False)
        assert set(out) == {r for r, f in flows.items() if f == lo}

    def test_empty_band(self, braess_tree):
        tree, _ = braess_tree
        inds = compute_indicators(tree, {0})
        assert filter_and_rank(inds, {"avg_flow": (-2.0, -1.0)}, "avg_flow", True) == []

    def test_tie_break_ascending_road_id(self):
        net = make_network([(1, 1, 2, 100.0, 5.0), (2, 2, 1, 100.0, 5.0)], 2)
        tree = create_tree(net, [])
        inds = compute_indicators(tree, {0})
        assert filter_and_rank(inds, {}, "avg_flow", descending=True) == [1, 2]

    def test_unknown_indicator(self, braess_tree):
        tree, _ = braess_tree
        inds = compute_indicators(tree, {0})
        with pytest.raises(StructuralError, match="unknown indicator"):
            filter_and_rank(inds, {}, "nope", True)
        with pytest.raises(StructuralError, match="unknown indicator"):
            filter_and_rank(inds, {"nope": (0.0, 1.0)}, "avg_flow", True)
        with pytest.raises(StructuralError, match="lo > hi"):
            filter_and_rank(inds, {"avg_flow": (2.0, 1.0)}, "avg_flow", True)

    def test_resort_is_idempotent(self, braess_tree):
        tree, closed = braess_tree
        inds = compute_indicators(tree, {0, closed})
        once = filter_and_rank(inds, {}, "avg_time", True)
        by_road = {i.road: i for i in inds}
        again = filter_and_rank([by_road[r] for r in once], {}, "avg_time", True)
        assert once == again


class TestHistogram:
    def test_examples(self):
        bins = histogram([1.0, 2.0, 3.0, 4.0], 2)
        assert [(b.lo, b.hi, b.count) for b in bins] == [(1.0, 2.5, 2), (2.5, 4.0, 2)]

    def test_degenerate_single_bin(self):
        bins = histogram([7.0, 7.0, 7.0], 5)
        assert len(bins) == 1
        assert bins[0].count == 3

    def test_empty_rejected(self):
        with pytest.raises(StructuralError):
            histogram([], 4)

    @given(
        values=st.lists(st.floats(-1000.0, 1000.0), min_size=1, max_size=200),
        bins=st.integers(1, 40),
    )
    @settings(max_examples=200)
    def test_counts_sum_to_input_size(self, values, bins):
        out = histogram(values, bins)
        assert sum(b.count for b in out) == len(values)
        # naive recount per bin agrees
        for b in out[:-1]:
            naive = sum(1 for v in values if b.lo <= v < b.hi)
            assert b.count == naive or len(out) == 1


class TestOdThroughRoad:
    def test_single_path(self):
        net = make_network([(1, 1, 2, 1000.0, 5.0)], 2)
        tree = create_tree(net, [Demand(1, 2, 1000.0)])
        flows = od_through_road(tree, 0, 1)
        assert flows == {1: (1000.0, 0.0), 2: (0.0, 1000.0)}

    def test_unused_road_is_empty(self):
        net = make_network([(1, 1, 2, 1000.0, 5.0), (2, 2, 1, 1000.0, 5.0)], 2)
        tree = create_tree(net, [Demand(1, 2, 10.0)])
        assert od_through_road(tree, 0, 2) == {}

    def test_braess_attribution_matches_volume(self, braess_tree):
        tree, closed = braess_tree
        for sid in (0, closed):
            node = tree.nodes[sid]
            for rid, status in node.assignment.statuses.items():
                flows = od_through_road(tree, sid, rid)
                orig = sum(o for o, _ in flows.values())
                term = sum(t for _, t in flows.values())
                assert orig == pytest.approx(status.actual_volume, rel=1e-6, abs=1e-9)
                assert term == pytest.approx(status.actual_volume, rel=1e-6, abs=1e-9)

    def test_braess_road2_origins(self, braess_tree):
        tree, _ = braess_tree
        flows = od_through_road(tree, 0, 2)
        assert flows[1][0] == pytest.approx(999.02, abs=0.5)
        assert flows[4][1] == pytest.approx(999.02, abs=0.5)

    def test_unknown_ids(self, braess_tree):
        tree, _ = braess_tree
        with pytest.raises(UnknownIdError):
            od_through_road(tree, 99, 1)
        with pytest.raises(UnknownIdError):
            od_through_road(tree, 0, 99)


class TestCellStatuses:
    def test_initial_state_deltas_zero(self, braess_tree):
        tree, _ = braess_tree
        cells = cell_statuses(tree, [0], [1, 2, 3])
        assert all(c.delta_time_vs_initial == 0.0 for c in cells)
        assert all(not c.is_new for c in cells)

    def test_braess_improvement_deltas(self, braess_tree):
        tree, closed = braess_tree
        cells = {c.road: c for c in cell_statuses(tree, [closed], [2, 5])}
        assert cells[2].delta_time_vs_initial > 0.0
        assert cells[5].delta_time_vs_initial > 0.0

    def test_closed_road_has_no_cell(self, braess_tree):
        tree, closed = braess_tree
        cells = cell_statuses(tree, [closed], [1, 3])
        assert [c.road for c in cells] == [1]

    def test_new_road_flagged(self):
        from roadplan import BuildRoad

        net = make_network([(1, 1, 2, 1000.0, 5.0)], 2)
        tree = create_tree(net, [Demand(1, 2, 100.0)])
        child = apply_modification(tree, 0, BuildRoad(2, 1, two_way=False, capacity=10.0, fftt=1.0))
        new_id = max(tree.nodes[child].network.roads)
        (cell,) = cell_statuses(tree, [child], [new_id])
        assert cell.is_new
        assert cell.delta_time_vs_initial is None
