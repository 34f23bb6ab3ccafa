"""Deterministic measurements on a single graph."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ParameterError


@dataclass(frozen=True)
class ComponentSummary:
    component_count: int
    largest_size: int
    isolated_count: int
    degree_sum: int

    def to_dict(self):
        return asdict(self)


def component_labels(g):
    if g.edge_count == 0:
        return g.n, np.arange(g.n)
    p = g.pairs
    # colex order sorts pairs by their larger endpoint, so rows come out sorted
    if len(p) > 1 and (np.diff(p[:, 1]) < 0).any():
        p = p[np.argsort(p[:, 1], kind="stable")]
    indptr = np.zeros(g.n + 1, dtype=np.int32)
    np.cumsum(np.bincount(p[:, 1], minlength=g.n), out=indptr[1:])
    A = csr_matrix((np.ones(len(p)), np.ascontiguousarray(p[:, 0]), indptr), shape=(g.n, g.n))
    return connected_components(A, directed=False)


def analyze(g):
    count, labels = component_labels(g)
    sizes = np.bincount(labels, minlength=count)
    degrees = g.degrees()
    return ComponentSummary(
        component_count=int(count),
        largest_size=int(sizes.max()),
        isolated_count=int(np.count_nonzero(degrees == 0)),
        degree_sum=int(degrees.sum()),
    )


def average_degree(g):
    return 2 * g.edge_count / g.n


def beta_threshold(n, beta):
    """Smallest component size that makes an ``n``-vertex graph ``beta``-connected."""
    if not 0.0 <= beta <= 1.0:
        raise ParameterError(f"beta must lie in [0, 1], got {beta}")
    return math.ceil(beta * n - 1e-9)


def is_beta_connected(g, beta, summary=None):
    summary = summary or analyze(g)
    return summary.largest_size >= beta_threshold(g.n, beta)


def is_connected(g):
    return analyze(g).component_count == 1
