"""Traffic what-if planning engine.

Equilibrium traffic assignment over editable road networks, a branching tree
of candidate states with costs and metrics, comparison analytics, and an
HTTP/JSON service plus CLI on top.
"""

from .assignment import (
    AssignmentParams,
    AssignmentResult,
    Path,
    bpr_time,
    enumerate_paths,
    logit_split,
    path_travel_time,
    solve_sue,
    total_system_travel_time,
)
from .errors import (
    ParseError,
    RoadPlanError,
    RootDeletionError,
    SessionError,
    StructuralError,
    UnknownIdError,
    UnreachableODError,
)
from .network import (
    Demand,
    Intersection,
    Road,
    RoadNetwork,
    RoadStatus,
    build_network,
    build_road,
    close_road,
    haversine_km,
    road_length_km,
    set_capacity,
    set_fftt,
)
from .statetree import (
    BuildRoad,
    CloseRoad,
    CostParams,
    MetricDeltas,
    Modification,
    SetCapacity,
    SetFftt,
    StateNode,
    StateTree,
    apply_modification,
    create_tree,
    delete_state,
    metric_deltas,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentParams",
    "AssignmentResult",
    "BuildRoad",
    "CloseRoad",
    "CostParams",
    "Demand",
    "Intersection",
    "MetricDeltas",
    "Modification",
    "ParseError",
    "Path",
    "Road",
    "RoadNetwork",
    "RoadPlanError",
    "RoadStatus",
    "RootDeletionError",
    "SessionError",
    "SetCapacity",
    "SetFftt",
    "StateNode",
    "StateTree",
    "StructuralError",
    "UnknownIdError",
    "UnreachableODError",
    "apply_modification",
    "bpr_time",
    "build_network",
    "build_road",
    "close_road",
    "create_tree",
    "delete_state",
    "enumerate_paths",
    "haversine_km",
    "logit_split",
    "metric_deltas",
    "path_travel_time",
    "road_length_km",
    "set_capacity",
    "set_fftt",
    "solve_sue",
    "total_system_travel_time",
]
