import itertools
from collections import Counter

import numpy as np
import pytest
from scipy import stats as sps

from models import FirstInClusterA, all_families, graphs_of
from rgmlab.core import NodeSample, PhasePoint, edge_mask, sample_graph, sample_nodes, wrap_exchangeable
from rgmlab.errors import ClassHypothesisError, ParameterError
from rgmlab.graph import LabeledGraph
from rgmlab.representation import encode_theorem2
from rgmlab.rng import RngStreamKey, pair_index
from rgmlab.stats import exchangeability_test
from rgmlab.zoo import geodesic_distance, make_gnp, make_mixture, make_rigged, make_sphere_cluster

FAMILIES = all_families()


def test_gnp_nodes_are_placeholders(key):
    nodes = sample_nodes(make_gnp(0.4), 5, key)
    assert nodes.n == 5 and nodes.points.shape == (5, 0)


def test_sphere_nodes_near_recorded_pivot(key):
    nodes = sample_nodes(make_sphere_cluster(1.0, 0.1, 0.1), 3, key)
    pivot = np.array(nodes.trace["pivot"])
    for p in nodes.points:
        # arccos route, independent of the chord formula used by the model
        angle = np.arccos(np.clip(np.dot(p, pivot), -1, 1))
        assert angle <= 0.1 + 1e-12
        assert np.isclose(np.linalg.norm(p), 1.0)


def test_theorem2_nodes_all_equal(key):
    nodes = sample_nodes(encode_theorem2(make_gnp(0.5), 6), 4, key)
    first = nodes.points[0]
    assert all(p == first for p in nodes.points[1:])


def test_gnp_extremes(key):
    assert sample_graph(make_gnp(0.0), 10, key).edge_count == 0
    assert sample_graph(make_gnp(1.0), 10, key) == LabeledGraph.complete(10)


def test_mixture_edge_density():
    m = make_mixture("uniform01")
    dens = [g.edge_count / 4950 for g in graphs_of(m, 100, 10_000, 11)]
    assert abs(np.mean(dens) - 0.5) < 0.01


def test_key_and_size_checked():
    with pytest.raises(ParameterError):
        sample_graph(make_gnp(0.5), 4, 12)
    with pytest.raises(ParameterError):
        sample_graph(make_gnp(0.5), 0, RngStreamKey(0))
    with pytest.raises(ParameterError):
        make_sphere_cluster(R=-1)


@pytest.mark.parametrize("label", sorted(FAMILIES))
def test_every_family_yields_simple_graphs_deterministically(label):
    model, n = FAMILIES[label]
    for t in range(5):
        key = RngStreamKey(99, t)
        g = sample_graph(model, n, key)
        A = g.adjacency()
        assert not A.diagonal().any() and (A == A.T).all()
        assert sample_graph(model, n, key) == g


def test_gnp_disjoint_triple_independent():
    m, n, trials = make_gnp(0.5), 6, 100_000
    idx = [pair_index(0, 1), pair_index(2, 3), pair_index(4, 5)]
    cols = np.array([g.mask()[idx] for g in graphs_of(m, n, trials, 3)])
    joint = cols.all(axis=1).mean()
    prod = np.prod(cols.mean(axis=0))
    se = np.sqrt(joint * (1 - joint) / trials)
    assert abs(joint - prod) <= 4 * se


def test_wrap_permutation_uniform():
    wrapped = wrap_exchangeable(make_rigged())
    trials = 10_000
    seen = Counter(tuple(sample_nodes(wrapped, 3, RngStreamKey(5, t)).points[:, 0].astype(int)) for t in range(trials))
    assert set(seen) == set(itertools.permutations((1, 2, 3)))
    for c in seen.values():
        assert abs(c / trials - 1 / 6) < 0.02


def test_wrap_keeps_exchangeable_marginal():
    base = make_sphere_cluster(1.0, 0.3, 0.2)
    wrapped = wrap_exchangeable(base)
    z_base = [sample_nodes(base, 5, RngStreamKey(1, t)).points[0, 2] for t in range(3000)]
    z_wrap = [sample_nodes(wrapped, 5, RngStreamKey(2, t)).points[0, 2] for t in range(3000)]
    assert sps.ks_2samp(z_base, z_wrap).pvalue > 0.01


def test_wrap_equalizes_cluster_membership():
    wrapped = wrap_exchangeable(FirstInClusterA())
    n, trials = 4, 8000
    inA = np.array([sample_nodes(wrapped, n, RngStreamKey(8, t)).points[:, 0] == 0 for t in range(trials)])
    expected = (1 + (n - 1) * 0.2) / n
    se = np.sqrt(expected * (1 - expected) / trials)
    for k in range(n):
        assert abs(inA[:, k].mean() - expected) <= 4 * se


@pytest.mark.parametrize("label", sorted(FAMILIES))
def test_wrapped_family_passes_exchangeability(label):
    model, n = FAMILIES[label]
    rep = exchangeability_test(wrap_exchangeable(model), n, 2000, 0.01, master_seed=17)
    assert rep.verdict == "pass", rep


def test_wrapped_flags():
    w = wrap_exchangeable(make_rigged())
    assert w.flags.local and w.flags.name_invariant and not w.flags.free
    assert wrap_exchangeable(FAMILIES["explicit"][0]).flags.name_invariant
    assert wrap_exchangeable(w).perm_depth == 2


def test_wrapped_keeps_edge_function():
    base = make_rigged()
    w = wrap_exchangeable(base)
    key = RngStreamKey(3, 1)
    nodes = sample_nodes(w, 6, key)
    np.testing.assert_array_equal(edge_mask(w, nodes, key), edge_mask(base, nodes, key))


def test_edge_mask_needs_geometric_model(key):
    with pytest.raises(ClassHypothesisError):
        edge_mask(FAMILIES["footnote2"][0], None, key)
    with pytest.raises(ClassHypothesisError):
        sample_nodes(FAMILIES["footnote2"][0], 5, key)


def test_node_sample_checks_length():
    with pytest.raises(ParameterError):
        NodeSample(3, np.zeros((2, 1)))
    ns = NodeSample(1, np.array([[0.1, 0.2, 0.3]]), "phase")
    assert ns.point(1) == PhasePoint(0.1, 0.2, 0.3)


def test_sphere_geodesic_matches_arccos():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal((2, 50, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    ref = np.arccos(np.clip((a * b).sum(axis=1), -1, 1))
    np.testing.assert_allclose(geodesic_distance(a, b, 1.0), ref, atol=1e-9)
