"""Branching what-if tree of network states.

Every node owns an immutable network snapshot, its equilibrium assignment,
the total-travel-time metric, and the cost of the modification that produced
it. Applying a modification to any state grows a new branch; deleting a state
removes its whole subtree. Rebuilding a tree by replaying its modification
log reproduces it exactly (the solver is deterministic), which is what the
session format relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .assignment import AssignmentParams, AssignmentResult, solve_sue, total_system_travel_time
from .errors import RootDeletionError, StructuralError, UnknownIdError
from .network import (
    Demand,
    RoadKind,
    RoadNetwork,
    build_road,
    close_road,
    haversine_km,
    road_length_km,
    set_capacity,
    set_fftt,
    validate_demands,
)


@dataclass(frozen=True)
class CostParams:
    """Construction cost rates, per kilometer of road."""

    surface_per_km: float = 4_000_000.0
    tunnel_per_km: float = 14_000_000.0

    def __post_init__(self) -> None:
        if self.surface_per_km <= 0 or self.tunnel_per_km <= 0:
            raise StructuralError("cost rates must be positive")


@dataclass(frozen=True)
class SetCapacity:
    road: int
    capacity: float
    kind = "set_capacity"


@dataclass(frozen=True)
class SetFftt:
    road: int
    fftt: float
    kind = "set_fftt"


@dataclass(frozen=True)
class CloseRoad:
    road: int
    kind = "close_road"


@dataclass(frozen=True)
class BuildRoad:
    from_node: int
    to_node: int
    two_way: bool = True
    road_kind: RoadKind = "surface"
    capacity: float | None = None
    fftt: float | None = None
    kind = "build_road"


Modification = SetCapacity | SetFftt | CloseRoad | BuildRoad


@dataclass
class StateNode:
    id: int
    parent: int | None
    modification: Modification | None
    network: RoadNetwork
    assignment: AssignmentResult
    metric: float
    step_cost: float
    cumulative_cost: float
    children: list[int] = field(default_factory=list)


@dataclass
class StateTree:
    nodes: dict[int, StateNode]
    root_id: int
    demands: list[Demand]
    assign_params: AssignmentParams
    cost_params: CostParams
    next_state_id: int

    def node(self, state_id: int) -> StateNode:
        try:
            return self.nodes[state_id]
        except KeyError:
            raise UnknownIdError(f"unknown state id {state_id}") from None


def create_tree(
    initial_network: RoadNetwork,
    demands: list[Demand],
    assign_params: AssignmentParams | None = None,
    cost_params: CostParams | None = None,
) -> StateTree:
    """Solve the original network and wrap it as the root of a fresh tree."""
    assign_params = assign_params or AssignmentParams()
    cost_params = cost_params or CostParams()
    demands = validate_demands(initial_network, demands)
    assignment = solve_sue(initial_network, demands, assign_params)
    root = StateNode(
        id=0,
        parent=None,
        modification=None,
        network=initial_network,
        assignment=assignment,
        metric=total_system_travel_time(assignment),
        step_cost=0.0,
        cumulative_cost=0.0,
    )
    return StateTree(
        nodes={0: root},
        root_id=0,
        demands=demands,
        assign_params=assign_params,
        cost_params=cost_params,
        next_state_id=1,
    )


def apply_edit(network: RoadNetwork, mod: Modification) -> RoadNetwork:
    """Apply one modification to a network snapshot."""
    if isinstance(mod, SetCapacity):
        return set_capacity(network, mod.road, mod.capacity)
    if isinstance(mod, SetFftt):
        return set_fftt(network, mod.road, mod.fftt)
    if isinstance(mod, CloseRoad):
        return close_road(network, mod.road)
    if isinstance(mod, BuildRoad):
        return build_road(
            network,
            mod.from_node,
            mod.to_node,
            two_way=mod.two_way,
            kind=mod.road_kind,
            capacity=mod.capacity,
            fftt=mod.fftt,
        )
    raise StructuralError(f"unknown modification type {type(mod).__name__}")


def modification_cost(network: RoadNetwork, mod: Modification, costs: CostParams) -> float:
    """Estimated cost of a modification against the network it applies to.

    Only capacity expansion and new construction are charged (per km of
    affected road); narrowing, FFTT changes, and closures are treated as
    free, their real-world costs being negligible next to construction.
    """
    if isinstance(mod, SetCapacity):
        road = network.road(mod.road)
        if mod.capacity > road.capacity:
            return costs.surface_per_km * road_length_km(network, mod.road)
        return 0.0
    if isinstance(mod, (SetFftt, CloseRoad)):
        return 0.0
    if isinstance(mod, BuildRoad):
        a = network.node(mod.from_node)
        b = network.node(mod.to_node)
        length = haversine_km(a.lon, a.lat, b.lon, b.lat)
        rate = costs.tunnel_per_km if mod.road_kind == "tunnel" else costs.surface_per_km
        return rate * length * (2.0 if mod.two_way else 1.0)
    raise StructuralError(f"unknown modification type {type(mod).__name__}")


def apply_modification(
    tree: StateTree,
    state_id: int,
    mod: Modification,
    cost_params: CostParams | None = None,
) -> int:
    """Create a child of ``state_id`` by applying ``mod`` and re-solving.

    The child is added only if the edit validates and the assignment
    succeeds; on any failure the tree is left unchanged.
    """
    parent = tree.node(state_id)
    costs = cost_params or tree.cost_params
    new_network = apply_edit(parent.network, mod)
    step_cost = modification_cost(parent.network, mod, costs)
    assignment = solve_sue(new_network, tree.demands, tree.assign_params)
    child = StateNode(
        id=tree.next_state_id,
        parent=state_id,
        modification=mod,
        network=new_network,
        assignment=assignment,
        metric=total_system_travel_time(assignment),
        step_cost=step_cost,
        cumulative_cost=parent.cumulative_cost + step_cost,
    )
    tree.nodes[child.id] = child
    parent.children.append(child.id)
    tree.next_state_id += 1
    return child.id


def delete_state(tree: StateTree, state_id: int) -> list[int]:
    """Remove a state and its whole subtree; returns the removed ids."""
    node = tree.node(state_id)
    if state_id == tree.root_id:
        raise RootDeletionError("the root state cannot be deleted")
    removed: list[int] = []
    stack = [state_id]
    while stack:
        sid = stack.pop()
        removed.append(sid)
        stack.extend(sorted(tree.nodes[sid].children, reverse=True))
    for sid in removed:
        del tree.nodes[sid]
    parent = tree.nodes[node.parent]
    parent.children.remove(state_id)
    return removed


@dataclass(frozen=True)
class MetricDeltas:
    vs_initial: float
    vs_parent: float
    vs_parent_applicable: bool


def _relative_improvement(reference: float, current: float) -> float:
    if reference == 0.0:
        return 0.0
    return (reference - current) / reference


def metric_deltas(tree: StateTree, state_id: int) -> MetricDeltas:
    """Signed relative metric changes versus the initial state and the parent.

    Positive values are improvements. The root reports 0 against itself and a
    flagged, not-applicable 0 against its nonexistent parent.
    """
    node = tree.node(state_id)
    initial = tree.nodes[tree.root_id].metric
    vs_initial = _relative_improvement(initial, node.metric)
    if node.parent is None:
        return MetricDeltas(vs_initial=vs_initial, vs_parent=0.0, vs_parent_applicable=False)
    parent_metric = tree.nodes[node.parent].metric
    return MetricDeltas(
        vs_initial=vs_initial,
        vs_parent=_relative_improvement(parent_metric, node.metric),
        vs_parent_applicable=True,
    )


def modification_log(tree: StateTree) -> list[tuple[int, int, Modification]]:
    """The tree's edits as (child id, parent id, modification), in id order."""
    out = []
    for sid in sorted(tree.nodes):
        node = tree.nodes[sid]
        if node.parent is not None and node.modification is not None:
            out.append((sid, node.parent, node.modification))
    return out
