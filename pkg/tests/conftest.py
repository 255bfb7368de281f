import numpy as np
import pytest

from fairseed.graph import (CommunityPartition, Instance, NodeAttrs,
                            graph_from_edges)


def make_attrs(n, cost=None, benefit=None, labels=None) -> NodeAttrs:
    return NodeAttrs(
        cost=np.asarray(cost if cost is not None else np.ones(n), dtype=float),
        benefit=np.asarray(benefit if benefit is not None else np.ones(n),
                           dtype=float),
        community=np.asarray(labels if labels is not None else np.zeros(n),
                             dtype=np.int64),
    )


def make_instance(name, n, edges, directed=False, cost=None, benefit=None,
                  labels=None) -> Instance:
    g = graph_from_edges(n, edges, directed=directed)
    attrs = make_attrs(n, cost=cost, benefit=benefit, labels=labels)
    parts = CommunityPartition.from_labels(attrs.community, attrs.benefit)
    return Instance(id=name, graph=g, attrs=attrs, parts=parts)


def random_tiny_instance(rng, max_nodes=6, max_arcs=10) -> Instance:
    """Random directed graph with <= max_arcs arcs and random attributes."""
    n = int(rng.integers(2, max_nodes + 1))
    possible = [(u, v) for u in range(n) for v in range(n) if u != v]
    k = int(rng.integers(1, min(max_arcs, len(possible)) + 1))
    idx = rng.choice(len(possible), size=k, replace=False)
    edges = [possible[i] + (float(rng.uniform(0.05, 1.0)),) for i in idx]
    labels = rng.integers(0, 2, size=n)
    labels[0] = 0
    labels[-1] = 1  # both communities nonempty
    return make_instance(
        f"tiny-{rng.integers(1 << 30)}", n, edges, directed=True,
        cost=rng.uniform(1.0, 10.0, n), benefit=rng.uniform(1.0, 10.0, n),
        labels=labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
