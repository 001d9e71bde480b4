"""Shared helpers: seeded random graph generation for property tests."""

from __future__ import annotations

import random

from provkit.model import EDGE_LABELS, GraphFamily, ProvGraph

GENERIC = ["ent", "act", "ag"]
APP_LABELS = ["app:A", "app:B", "app:C", "app:D"]


def random_graph(
    rng: random.Random,
    graph_id: str = "g",
    max_nodes: int = 25,
    max_edges: int = 60,
    app_label_prob: float = 0.4,
) -> ProvGraph:
    """A random labeled directed multigraph (self-loops and duplicates allowed)."""
    n = rng.randint(1, max_nodes)
    ids = [f"n{i}" for i in range(n)]
    nodes = {}
    for nid in ids:
        labels = {rng.choice(GENERIC)}
        while rng.random() < app_label_prob:
            labels.add(rng.choice(APP_LABELS))
        nodes[nid] = frozenset(labels)
    m = rng.randint(0, max_edges)
    edge_labels = sorted(EDGE_LABELS)
    edges = tuple(
        (rng.choice(ids), rng.choice(ids), rng.choice(edge_labels)) for _ in range(m)
    )
    return ProvGraph(graph_id, nodes, edges)


def random_family(rng: random.Random, count: int, **kwargs) -> GraphFamily:
    return GraphFamily(tuple(random_graph(rng, f"g{i}", **kwargs) for i in range(count)))
