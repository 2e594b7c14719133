from __future__ import annotations

import random

import pytest

from roadplan import Demand, Intersection, Road, RoadNetwork, build_network
from roadplan.datasets import load_dataset


def make_network(roads: list[tuple[int, int, int, float, float]], n_nodes: int) -> RoadNetwork:
    """Build a small test network from (id, from, to, capacity, fftt) rows.

    Nodes are laid out on a 4-wide grid of ~1 km spacing so geometry-derived
    lengths are sensible.
    """
    nodes = [
        Intersection(i, 0.01 * ((i - 1) % 4), 0.01 * ((i - 1) // 4))
        for i in range(1, n_nodes + 1)
    ]
    return build_network(
        nodes,
        [Road(rid, a, b, cap, fftt) for rid, a, b, cap, fftt in roads],
    )


def random_network(seed: int, max_nodes: int = 8) -> tuple[RoadNetwork, list[Demand]]:
    """Seeded random network with a guaranteed 1->2->...->n chain.

    Demands run from lower- to higher-numbered nodes, so every OD pair is
    reachable; magnitudes are kept moderate relative to capacities so the
    equilibrium is well-conditioned.
    """
    rng = random.Random(seed)
    n = rng.randint(3, max_nodes)
    rows: list[tuple[int, int, int, float, float]] = []
    rid = 1
    for i in range(1, n):
        rows.append((rid, i, i + 1, rng.uniform(1000.0, 3000.0), rng.uniform(2.0, 15.0)))
        rid += 1
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if a == b or (b == a + 1):
                continue
            if rng.random() < 0.3:
                rows.append((rid, a, b, rng.uniform(1000.0, 3000.0), rng.uniform(2.0, 15.0)))
                rid += 1
    network = make_network(rows, n)

    n_ods = rng.randint(1, min(5, n * (n - 1) // 2))
    pairs = sorted({(a, b) for a in range(1, n) for b in range(a + 1, n + 1)})
    chosen = rng.sample(pairs, min(n_ods, len(pairs)))
    demands = [Demand(o, d, rng.uniform(100.0, 600.0)) for o, d in sorted(chosen)]
    return network, demands


@pytest.fixture(scope="session")
def braess():
    return load_dataset("braess")


@pytest.fixture(scope="session")
def siouxfalls():
    return load_dataset("siouxfalls")
