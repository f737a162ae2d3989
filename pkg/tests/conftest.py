"""Shared fixtures: the bundled reference network and some tiny graphs."""

import numpy as np
import pytest

from mwconsensus import builtin
from mwconsensus.mwgraph import MatrixWeightedGraph


@pytest.fixture(scope="session")
def ref_graph():
    return builtin.reference_graph()


@pytest.fixture(scope="session")
def ref_coupling():
    return builtin.reference_coupling()


@pytest.fixture(scope="session")
def ref_leaderless_record():
    """One leaderless replication run, shared by the slower test modules."""
    from mwconsensus import sim
    return sim.run(builtin.leaderless_scenario(seed=0))


@pytest.fixture(scope="session")
def ref_lf_record():
    from mwconsensus import sim
    return sim.run(builtin.leader_follower_scenario(seed=0))


def two_node_graph(weight, d=None, declared=None):
    w = np.asarray(weight, dtype=float)
    d = d if d is not None else w.shape[0]
    spec = (0, 1, w) if declared is None else (0, 1, w, declared)
    return MatrixWeightedGraph.from_edges(2, d, [spec])


@pytest.fixture
def pd_pair():
    """Two nodes joined by a 2x2 positive definite weight."""
    return two_node_graph([[2.0, 0.3], [0.3, 1.0]])


def random_balanced_scalar_graph(rng, n, extra_edge_prob=0.4):
    """Connected signed scalar graph that is structurally balanced by
    construction: edge signs follow a random gauge."""
    gauge = rng.choice([-1.0, 1.0], size=n)
    edges = {}
    order = rng.permutation(n)
    for idx in range(1, n):
        i = int(order[idx])
        j = int(order[int(rng.integers(0, idx))])
        a, b = min(i, j), max(i, j)
        mag = float(rng.uniform(0.5, 2.5))
        edges[(a, b)] = gauge[a] * gauge[b] * mag
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in edges and rng.uniform() < extra_edge_prob:
                mag = float(rng.uniform(0.5, 2.5))
                edges[(a, b)] = gauge[a] * gauge[b] * mag
    return edges, gauge
