"""Comparison analytics over a selection of tree states.

Backs the road/state comparison matrix, the indicator panel (per-road means
and ranges of four status measures over the selected states), and OD-trip
attribution for a clicked road.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import StructuralError, UnknownIdError
from .statetree import StateTree

INDICATOR_NAMES = (
    "avg_flow",
    "avg_flow_cap_ratio",
    "avg_time",
    "avg_fftt_time_ratio",
    "scope_flow",
    "scope_flow_cap_ratio",
    "scope_time",
    "scope_fftt_time_ratio",
)


@dataclass(frozen=True)
class RoadIndicators:
    road: int
    avg_flow: float
    avg_flow_cap_ratio: float
    avg_time: float
    avg_fftt_time_ratio: float
    scope_flow: float
    scope_flow_cap_ratio: float
    scope_time: float
    scope_fftt_time_ratio: float
    states_present: int

    def value(self, name: str) -> float:
        if name not in INDICATOR_NAMES:
            raise StructuralError(f"unknown indicator {name!r}")
        return getattr(self, name)


@dataclass(frozen=True)
class CellStatus:
    road: int
    state: int
    capacity: float
    volume: float
    fftt: float
    actual_time: float
    delta_time_vs_initial: float | None  # None for roads absent from the initial state
    is_new: bool


@dataclass(frozen=True)
class HistogramBin:
    lo: float
    hi: float
    count: int


def compute_indicators(tree: StateTree, selected_states: set[int]) -> list[RoadIndicators]:
    """Per-road means and ranges of flow, flow/capacity, time, and fftt/time.

    A road is included if it exists in at least one selected state, and its
    statistics run over exactly the states that contain it.
    """
    if not selected_states:
        raise StructuralError("at least one state must be selected")
    states = [tree.node(sid) for sid in sorted(selected_states)]
    roads: set[int] = set()
    for st in states:
        roads.update(st.network.roads)
    out: list[RoadIndicators] = []
    for rid in sorted(roads):
        flows: list[float] = []
        ratios: list[float] = []
        times: list[float] = []
        fftt_ratios: list[float] = []
        for st in states:
            road = st.network.roads.get(rid)
            if road is None:
                continue
            status = st.assignment.statuses[rid]
            flows.append(status.actual_volume)
            ratios.append(status.actual_volume / road.capacity)
            times.append(status.actual_time)
            fftt_ratios.append(road.fftt / status.actual_time)
        out.append(
            RoadIndicators(
                road=rid,
                avg_flow=sum(flows) / len(flows),
                avg_flow_cap_ratio=sum(ratios) / len(ratios),
                avg_time=sum(times) / len(times),
                avg_fftt_time_ratio=sum(fftt_ratios) / len(fftt_ratios),
                scope_flow=max(flows) - min(flows),
                scope_flow_cap_ratio=max(ratios) - min(ratios),
                scope_time=max(times) - min(times),
                scope_fftt_time_ratio=max(fftt_ratios) - min(fftt_ratios),
                states_present=len(flows),
            )
        )
    return out


def filter_and_rank(
    indicators: list[RoadIndicators],
    range_filters: dict[str, tuple[float, float]] | None = None,
    sort_key: str = "avg_flow",
    descending: bool = True,
) -> list[int]:
    """Road ids passing all range filters, ordered by one indicator.

    Filter bounds are inclusive; ties are broken by ascending road id.
    """
    range_filters = range_filters or {}
    for name, (lo, hi) in range_filters.items():
        if name not in INDICATOR_NAMES:
            raise StructuralError(f"unknown indicator {name!r}")
        if lo > hi:
            raise StructuralError(f"filter for {name!r} has lo > hi")
    if sort_key not in INDICATOR_NAMES:
        raise StructuralError(f"unknown indicator {sort_key!r}")

    kept = [
        ind
        for ind in indicators
        if all(lo <= ind.value(name) <= hi for name, (lo, hi) in range_filters.items())
    ]
    sign = -1.0 if descending else 1.0
    kept.sort(key=lambda ind: (sign * ind.value(sort_key), ind.road))
    return [ind.road for ind in kept]


def histogram(values: list[float], bin_count: int = 20) -> list[HistogramBin]:
    """Equal-width bins over [min, max]; the last bin includes the maximum.

    All-equal input degenerates to a single bin holding everything.
    """
    if not values:
        raise StructuralError("histogram requires at least one value")
    if bin_count < 1:
        raise StructuralError(f"bin_count must be at least 1, got {bin_count}")
    lo, hi = min(values), max(values)
    if lo == hi:
        return [HistogramBin(lo, hi, len(values))]
    width = (hi - lo) / bin_count
    counts = [0] * bin_count
    for v in values:
        idx = min(int((v - lo) / width), bin_count - 1)
        counts[idx] += 1
    return [
        HistogramBin(lo + i * width, lo + (i + 1) * width, counts[i])
        for i in range(bin_count)
    ]


def od_through_road(
    tree: StateTree, state_id: int, road_id: int
) -> dict[int, tuple[float, float]]:
    """Where the traffic on a road comes from and goes to.

    For every equilibrium path crossing the road, its flow is credited to the
    path's origin node (originating) and destination node (terminating).
    Nodes with no contribution are omitted.
    """
    node = tree.node(state_id)
    node.network.road(road_id)
    totals: dict[int, list[float]] = {}
    for od in sorted(node.assignment.path_flows):
        for path, flow in node.assignment.path_flows[od]:
            if road_id not in path.roads or flow == 0.0:
                continue
            totals.setdefault(path.origin, [0.0, 0.0])[0] += flow
            totals.setdefault(path.destination, [0.0, 0.0])[1] += flow
    return {nid: (orig, term) for nid, (orig, term) in sorted(totals.items())}


def cell_statuses(
    tree: StateTree, state_ids: list[int], road_ids: list[int]
) -> list[CellStatus]:
    """Matrix cells for the requested roads and states.

    One cell per (road, state) where the road exists. The time delta is
    measured against the initial state (positive = faster now); roads that
    the initial state does not contain are flagged as new instead.
    """
    initial = tree.nodes[tree.root_id]
    states = [tree.node(sid) for sid in state_ids]
    known: set[int] = set()
    for st in tree.nodes.values():
        known.update(st.network.roads)
    for rid in road_ids:
        if rid not in known:
            raise UnknownIdError(f"road id {rid} not present in any state of the tree")
    cells: list[CellStatus] = []
    for st in states:
        for rid in road_ids:
            road = st.network.roads.get(rid)
            if road is None:
                continue
            status = st.assignment.statuses[rid]
            if rid in initial.network.roads:
                delta = initial.assignment.statuses[rid].actual_time - status.actual_time
                is_new = False
            else:
                delta = None
                is_new = True
            cells.append(
                CellStatus(
                    road=rid,
                    state=st.id,
                    capacity=road.capacity,
                    volume=status.actual_volume,
                    fftt=road.fftt,
                    actual_time=status.actual_time,
                    delta_time_vs_initial=delta,
                    is_new=is_new,
                )
            )
    return cells
