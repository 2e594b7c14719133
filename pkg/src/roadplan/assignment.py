"""Stochastic user equilibrium assignment.

Demand for each OD pair is split over a fixed set of candidate paths by a
logit choice model on path travel times; link times respond to volume through
the BPR curve. The resulting fixed point is solved by self-regulated
averaging: a successive-averages scheme whose step size shrinks faster
whenever the iteration gap grows.

Candidate paths are the K shortest loopless paths under free-flow times
(all simple paths on networks of at most 8 nodes), which makes the choice
model well-defined and results reproducible bit-for-bit.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import StructuralError, UnknownIdError, UnreachableODError
from .network import Demand, RoadNetwork, RoadStatus, validate_demands

BPR_ALPHA = 0.15
BPR_BETA = 4

EXHAUSTIVE_NODE_LIMIT = 8


@dataclass(frozen=True)
class Path:
    """A loopless walk from an OD pair's origin to its destination, as road ids."""

    origin: int
    destination: int
    roads: tuple[int, ...]


@dataclass(frozen=True)
class AssignmentParams:
    theta: float = 0.3
    k_paths: int = 8
    max_iters: int = 1000
    rel_gap_tol: float = 1e-4
    sra_big_step: float = 2.0
    sra_small_step: float = 0.1

    def __post_init__(self) -> None:
        if self.theta <= 0:
            raise StructuralError(f"theta must be positive, got {self.theta}")
        if self.k_paths < 1:
            raise StructuralError(f"k_paths must be at least 1, got {self.k_paths}")
        if self.rel_gap_tol <= 0:
            raise StructuralError(f"rel_gap_tol must be positive, got {self.rel_gap_tol}")
        if self.max_iters < 0:
            raise StructuralError(f"max_iters must be nonnegative, got {self.max_iters}")
        if self.sra_big_step <= 0 or self.sra_small_step <= 0:
            raise StructuralError("SRA step increments must be positive")


@dataclass(frozen=True)
class AssignmentResult:
    statuses: dict[int, RoadStatus]
    path_flows: dict[tuple[int, int], list[tuple[Path, float]]]
    iterations: int
    converged: bool
    final_rel_gap: float


def bpr_time(fftt: float, capacity: float, volume: float) -> float:
    """Link travel time under the BPR curve: fftt * (1 + 0.15 (v/c)^4)."""
    if fftt <= 0:
        raise StructuralError(f"FFTT must be positive, got {fftt}")
    if capacity <= 0:
        raise StructuralError(f"capacity must be positive, got {capacity}")
    if volume < 0:
        raise StructuralError(f"volume must be nonnegative, got {volume}")
    return fftt * (1.0 + BPR_ALPHA * (volume / capacity) ** BPR_BETA)


def logit_split(path_times: list[float], theta: float) -> list[float]:
    """Logit choice probabilities over path times.

    Times are shifted by their minimum before exponentiating; the logit is
    invariant under a common shift, and this keeps the exponents bounded.
    """
    if not path_times:
        raise StructuralError("logit_split requires at least one path time")
    if theta <= 0:
        raise StructuralError(f"theta must be positive, got {theta}")
    t_min = min(path_times)
    weights = [math.exp(-theta * (t - t_min)) for t in path_times]
    total = sum(weights)
    return [w / total for w in weights]


def path_travel_time(statuses: dict[int, RoadStatus], path: Path) -> float:
    """Current travel time of a path: the sum of its roads' actual times."""
    return sum(statuses[r].actual_time for r in path.roads)


def total_system_travel_time(result: AssignmentResult) -> float:
    """The optimization metric: total volume-weighted travel time over all roads."""
    return sum(
        result.statuses[r].actual_volume * result.statuses[r].actual_time
        for r in sorted(result.statuses)
    )


def _adjacency(network: RoadNetwork) -> dict[int, list[tuple[int, int, float]]]:
    """node -> [(road_id, to_node, fftt)], sorted by road id for determinism."""
    adj: dict[int, list[tuple[int, int, float]]] = {n: [] for n in network.nodes}
    for rid in sorted(network.roads):
        r = network.roads[rid]
        adj[r.from_node].append((rid, r.to_node, r.fftt))
    return adj


def _all_simple_paths(
    adj: dict[int, list[tuple[int, int, float]]], origin: int, destination: int
) -> list[tuple[float, tuple[int, ...]]]:
    """Exhaustive DFS enumeration of simple paths, as (fftt, road ids)."""
    out: list[tuple[float, tuple[int, ...]]] = []
    stack: list[int] = []
    visited = {origin}

    def visit(node: int, cost: float) -> None:
        if node == destination:
            out.append((cost, tuple(stack)))
            return
        for rid, nxt, w in adj[node]:
            if nxt in visited:
                continue
            visited.add(nxt)
            stack.append(rid)
            visit(nxt, cost + w)
            stack.pop()
            visited.remove(nxt)

    visit(origin, 0.0)
    return out


def _dijkstra(
    adj: dict[int, list[tuple[int, int, float]]],
    origin: int,
    destination: int,
    banned_roads: set[int],
    banned_nodes: set[int],
) -> tuple[float, tuple[int, ...]] | None:
    """Shortest path by FFTT; ties broken by lexicographic road-id sequence."""
    heap: list[tuple[float, tuple[int, ...], int]] = [(0.0, (), origin)]
    settled: set[int] = set()
    while heap:
        cost, roads, node = heapq.heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        if node == destination:
            return cost, roads
        for rid, nxt, w in adj[node]:
            if rid in banned_roads or nxt in banned_nodes or nxt in settled:
                continue
            heapq.heappush(heap, (cost + w, roads + (rid,), nxt))
    return None


def _road_nodes(network: RoadNetwork, origin: int, roads: tuple[int, ...]) -> list[int]:
    nodes = [origin]
    for rid in roads:
        nodes.append(network.roads[rid].to_node)
    return nodes


def _yen_k_shortest(
    network: RoadNetwork,
    adj: dict[int, list[tuple[int, int, float]]],
    origin: int,
    destination: int,
    k: int,
) -> list[tuple[float, tuple[int, ...]]]:
    first = _dijkstra(adj, origin, destination, set(), set())
    if first is None:
        return []
    accepted: list[tuple[float, tuple[int, ...]]] = [first]
    candidates: list[tuple[float, tuple[int, ...]]] = []
    seen: set[tuple[int, ...]] = {first[1]}

    while len(accepted) < k:
        _, prev_roads = accepted[-1]
        prev_nodes = _road_nodes(network, origin, prev_roads)
        root_cost = 0.0
        for i in range(len(prev_roads)):
            spur_node = prev_nodes[i]
            root_roads = prev_roads[:i]
            banned_roads: set[int] = set()
            for _, roads in accepted:
                if roads[:i] == root_roads and len(roads) > i:
                    banned_roads.add(roads[i])
            for cost, roads in candidates:
                if roads[:i] == root_roads and len(roads) > i:
                    banned_roads.add(roads[i])
            banned_nodes = set(prev_nodes[:i])
            spur = _dijkstra(adj, spur_node, destination, banned_roads, banned_nodes)
            if spur is not None:
                total = (root_cost + spur[0], root_roads + spur[1])
                if total[1] not in seen:
                    seen.add(total[1])
                    heapq.heappush(candidates, total)
            root_cost += network.roads[prev_roads[i]].fftt
        if not candidates:
            break
        accepted.append(heapq.heappop(candidates))
    return accepted


def enumerate_paths(network: RoadNetwork, od: tuple[int, int], k_paths: int) -> list[Path]:
    """Candidate paths for an OD pair, shortest free-flow time first.

    Networks of at most 8 nodes are enumerated exhaustively; larger ones use
    Yen's K-shortest loopless paths. Equal-time paths are ordered by their
    road-id sequences.
    """
    origin, destination = od
    network.node(origin)
    network.node(destination)
    if origin == destination:
        raise StructuralError("path enumeration requires origin != destination")
    if k_paths < 1:
        raise StructuralError(f"k_paths must be at least 1, got {k_paths}")
    adj = _adjacency(network)
    if len(network.nodes) <= EXHAUSTIVE_NODE_LIMIT:
        found = _all_simple_paths(adj, origin, destination)
    else:
        found = _yen_k_shortest(network, adj, origin, destination, k_paths)
        # Yen emits in cost order already, but re-sorting applies the tie-break.
    found.sort(key=lambda cr: (cr[0], cr[1]))
    if not found:
        raise UnreachableODError([od])
    if len(network.nodes) > EXHAUSTIVE_NODE_LIMIT:
        found = found[:k_paths]
    return [Path(origin, destination, roads) for _, roads in found]


class _Problem:
    """Flattened arrays for one network + demand table, shared by solver steps."""

    def __init__(self, network: RoadNetwork, demands: list[Demand], k_paths: int):
        self.network = network
        self.ods = [(d.origin, d.destination) for d in demands]
        self.demand = np.array([d.trips for d in demands], dtype=np.float64)

        paths_by_od: list[list[Path]] = []
        unreachable: list[tuple[int, int]] = []
        for od in self.ods:
            try:
                paths_by_od.append(enumerate_paths(network, od, k_paths))
            except UnreachableODError:
                unreachable.append(od)
        if unreachable:
            raise UnreachableODError(unreachable)

        self.road_ids = sorted(network.roads)
        road_index = {rid: i for i, rid in enumerate(self.road_ids)}
        self.fftt = np.array([network.roads[r].fftt for r in self.road_ids])
        self.capacity = np.array([network.roads[r].capacity for r in self.road_ids])

        self.paths: list[Path] = [p for group in paths_by_od for p in group]
        counts = np.array([len(g) for g in paths_by_od], dtype=np.int64)
        self.starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        self.counts = counts
        self.demand_per_path = np.repeat(self.demand, counts)

        pair_path: list[int] = []
        pair_link: list[int] = []
        for pi, p in enumerate(self.paths):
            for rid in p.roads:
                pair_path.append(pi)
                pair_link.append(road_index[rid])
        self.pair_path = np.array(pair_path, dtype=np.int64)
        self.pair_link = np.array(pair_link, dtype=np.int64)
        self.n_links = len(self.road_ids)
        self.n_paths = len(self.paths)

    def link_flows(self, path_flows: np.ndarray) -> np.ndarray:
        return np.bincount(
            self.pair_link, weights=path_flows[self.pair_path], minlength=self.n_links
        )

    def link_times(self, link_flows: np.ndarray) -> np.ndarray:
        return self.fftt * (1.0 + BPR_ALPHA * (link_flows / self.capacity) ** BPR_BETA)

    def path_times(self, link_times: np.ndarray) -> np.ndarray:
        pt = np.zeros(self.n_paths)
        np.add.at(pt, self.pair_path, link_times[self.pair_link])
        return pt

    def logit_load(self, path_times: np.ndarray, theta: float) -> np.ndarray:
        """Demand loaded onto paths by per-OD logit splits (min-shifted)."""
        mins = np.minimum.reduceat(path_times, self.starts)
        shifted = path_times - np.repeat(mins, self.counts)
        w = np.exp(-theta * shifted)
        sums = np.add.reduceat(w, self.starts)
        return self.demand_per_path * (w / np.repeat(sums, self.counts))


def solve_sue(
    network: RoadNetwork,
    demands: list[Demand],
    params: AssignmentParams | None = None,
    trace: list[dict[tuple[int, int], list[tuple[Path, float]]]] | None = None,
) -> AssignmentResult:
    """Solve the logit-based equilibrium for one network state.

    Self-regulated averaging: starting from a logit load at free-flow times,
    each iteration blends the current path flows toward the logit reload at
    current times with step 1/beta. beta grows by a large increment when the
    L1 link-flow gap worsened and by a small one otherwise. Convergence is
    declared when the relative L1 gap between the reloaded and current link
    flows falls below ``rel_gap_tol``, so the returned flows satisfy the
    fixed-point property at that tolerance.

    Exhausting the iteration budget is not an error: the best iterate seen is
    returned with ``converged=False``.

    When ``trace`` is given, the per-OD path flows of every iterate (the
    initial load included) are appended to it; diagnostics only.
    """
    if params is None:
        params = AssignmentParams()
    demands = validate_demands(network, demands)
    prob = _Problem(network, demands, params.k_paths)

    if prob.n_paths == 0:
        statuses = {
            rid: RoadStatus(rid, 0.0, bpr_time(network.roads[rid].fftt, network.roads[rid].capacity, 0.0))
            for rid in prob.road_ids
        }
        return AssignmentResult(statuses, {}, 0, True, 0.0)

    free_flow_times = prob.link_times(np.zeros(prob.n_links))
    path_flows = prob.logit_load(prob.path_times(free_flow_times), params.theta)
    if trace is not None:
        trace.append(_path_flow_map(prob, path_flows))

    beta = 1.0
    prev_gap_abs: float | None = None
    converged = False
    iterations = 0
    best_flows = path_flows
    best_gap = math.inf
    rel_gap = math.inf

    while True:
        flows = prob.link_flows(path_flows)
        times = prob.link_times(flows)
        aux = prob.logit_load(prob.path_times(times), params.theta)
        gap_abs = float(np.sum(np.abs(prob.link_flows(aux) - flows)))
        rel_gap = gap_abs / max(float(np.sum(np.abs(flows))), 1.0)
        if rel_gap < best_gap:
            best_gap = rel_gap
            best_flows = path_flows
        if rel_gap < params.rel_gap_tol:
            converged = True
            break
        if iterations >= params.max_iters:
            break
        path_flows = path_flows + (1.0 / beta) * (aux - path_flows)
        iterations += 1
        if trace is not None:
            trace.append(_path_flow_map(prob, path_flows))
        if prev_gap_abs is not None and gap_abs > prev_gap_abs:
            beta += params.sra_big_step
        else:
            beta += params.sra_small_step
        prev_gap_abs = gap_abs

    final_flows = path_flows if converged else best_flows
    final_gap = rel_gap if converged else best_gap
    link_flows = prob.link_flows(final_flows)
    link_times = prob.link_times(link_flows)
    statuses = {
        rid: RoadStatus(rid, float(link_flows[i]), float(link_times[i]))
        for i, rid in enumerate(prob.road_ids)
    }
    return AssignmentResult(
        statuses=statuses,
        path_flows=_path_flow_map(prob, final_flows),
        iterations=iterations,
        converged=converged,
        final_rel_gap=float(final_gap),
    )


def _path_flow_map(
    prob: _Problem, path_flows: np.ndarray
) -> dict[tuple[int, int], list[tuple[Path, float]]]:
    out: dict[tuple[int, int], list[tuple[Path, float]]] = {}
    for oi, od in enumerate(prob.ods):
        s = int(prob.starts[oi])
        e = s + int(prob.counts[oi])
        out[od] = [(prob.paths[k], float(path_flows[k])) for k in range(s, e)]
    return out
