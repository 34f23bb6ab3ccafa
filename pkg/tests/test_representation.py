import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from models import invariant_families, three_atom
from rgmlab.core import wrap_exchangeable
from rgmlab.errors import ParameterError
from rgmlab.graph import LabeledGraph
from rgmlab.representation import (
    MatrixSequence,
    coupled_pair,
    decode_index,
    encode_index,
    encode_theorem1,
    encode_theorem2,
    isomorphism_code,
    verify_equivalence,
)
from rgmlab.rng import RngStreamKey
from rgmlab.stats import exchangeability_test
from rgmlab.zoo import ExplicitDistribution, make_explicit, make_footnote2, make_gnp, make_knn, make_rigged


def test_single_atom_triangle_reproduced():
    tri = LabeledGraph.complete(3)
    enc = encode_theorem1(make_explicit(ExplicitDistribution(3, ((tri, 1.0),))), 3)
    for t in range(20):
        assert enc.sample_graph(3, RngStreamKey(1, t)) == tri


@pytest.mark.parametrize("encode", [encode_theorem1, encode_theorem2])
def test_gnp_coupled_reconstruction(encode):
    enc = encode(make_gnp(0.5), 4)
    for t in range(10_000):
        base, got = coupled_pair(enc, 4, RngStreamKey(2, t))
        assert base == got


def test_last_row_encodes_index():
    enc = encode_theorem1(make_gnp(0.5), 8)
    nodes = enc.sample_nodes(8, RngStreamKey(0))
    Z = nodes.points[4].matrix(8)
    assert Z.shape == (9, 8)
    assert decode_index(Z[8]) == 5
    assert set(np.unique(Z)) <= {0, 1}
    assert not Z[:8].diagonal().any()


def test_matrix_shapes_per_size():
    enc1 = encode_theorem1(make_gnp(0.5), 6)
    enc2 = encode_theorem2(make_gnp(0.5), 6)
    x1 = enc1.sample_nodes(6, RngStreamKey(3)).points[0]
    x2 = enc2.sample_nodes(6, RngStreamKey(3)).points[0]
    for m in range(1, 7):
        assert x1.matrix(m).shape == (m + 1, m)
        assert x2.matrix(m).shape == (m, m)
        A = x2.matrix(m)
        assert (A == A.T).all()


@given(st.integers(1, 255), st.integers(8, 12))
def test_index_round_trip(i, width):
    bits = encode_index(i, width)
    assert len(bits) == width and decode_index(bits) == i


def test_index_is_little_endian():
    assert encode_index(6, 4).tolist() == [0, 1, 1, 0]


def test_theorem2_nodes_identical_bit_for_bit():
    enc = encode_theorem2(three_atom(), 3)
    nodes = enc.sample_nodes(3, RngStreamKey(4))
    a, b, c = nodes.points
    assert a == b == c
    for m in range(1, 4):
        assert a.matrix(m).tobytes() == c.matrix(m).tobytes()


def test_theorem2_two_atom_frequencies():
    dist = ExplicitDistribution(3, ((LabeledGraph.empty(3), 0.3), (LabeledGraph.path(3), 0.7)))
    enc = encode_theorem2(make_explicit(dist), 3)
    trials = 5000
    frac = np.mean([enc.sample_graph(3, RngStreamKey(5, t)).edge_count == 0 for t in range(trials)])
    assert abs(frac - 0.3) <= 3 * np.sqrt(0.21 / trials)


def test_theorem2_of_exchangeable_base_passes():
    enc = encode_theorem2(make_gnp(0.4), 6)
    assert exchangeability_test(enc, 6, 2000, 0.01, 3).verdict == "pass"


def test_encoded_flags():
    assert encode_theorem1(make_knn(1), 5).flags.local
    assert encode_theorem2(make_rigged(), 5).flags.name_invariant


def test_encoder_guards():
    with pytest.raises(ParameterError):
        encode_theorem1(make_gnp(0.5), 257)
    with pytest.raises(ParameterError):
        encode_theorem2(make_gnp(0.5), 1)
    with pytest.raises(ParameterError):
        encode_theorem1(make_gnp(0.5), 4).sample_graph(5, RngStreamKey(0))


def test_encoder_respects_base_size_limits():
    enc = encode_theorem1(make_footnote2(), 6)
    g = enc.sample_graph(6, RngStreamKey(1))
    assert g == make_footnote2().sample_graph(6, RngStreamKey(1))


def test_matrix_sequence_equality():
    a = encode_theorem2(make_gnp(0.5), 4).sample_nodes(4, RngStreamKey(1)).points[0]
    b = encode_theorem2(make_gnp(0.5), 4).sample_nodes(4, RngStreamKey(1)).points[0]
    c = encode_theorem2(make_gnp(0.5), 4).sample_nodes(4, RngStreamKey(2)).points[0]
    assert a == b
    assert a != c
    assert isinstance(a, MatrixSequence)


# isomorphism canonical form -------------------------------------------------


def brute_iso_class(g):
    best = None
    for perm in itertools.permutations(range(g.n)):
        code = g.relabel(np.array(perm)).code()
        best = code if best is None or code < best else best
    return best


@given(st.integers(1, 5), st.data())
def test_isomorphism_code_invariant_and_complete(n, data):
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    edges = data.draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    g = LabeledGraph.from_edges(n, edges)
    perm = data.draw(st.permutations(range(n)))
    h = g.relabel(np.array(perm))
    assert isomorphism_code(g) == isomorphism_code(h)
    edges2 = data.draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    g2 = LabeledGraph.from_edges(n, edges2)
    same_class = brute_iso_class(g) == brute_iso_class(g2)
    assert (isomorphism_code(g) == isomorphism_code(g2)) == same_class


def test_isomorphism_counts_classes_on_four():
    codes = set()
    pairs = list(itertools.combinations(range(1, 5), 2))
    for bits in range(1 << 6):
        codes.add(isomorphism_code(LabeledGraph.from_edges(4, [p for k, p in enumerate(pairs) if bits >> k & 1])))
    assert len(codes) == 11


def test_isomorphism_size_limit():
    with pytest.raises(ParameterError):
        isomorphism_code(LabeledGraph.empty(9))


# equivalence ---------------------------------------------------------------


def test_same_model_equivalent_across_repeats():
    m = make_gnp(0.5)
    ok = sum(verify_equivalence(m, m, 3, 1000, 0.01, master_seed=s).equivalent for s in range(100))
    assert ok >= 99


def test_different_p_not_equivalent():
    rep = verify_equivalence(make_gnp(0.3), make_gnp(0.7), 3, 10_000, 0.01, master_seed=1)
    assert rep.verdict == "not equivalent"
    assert rep.p_value < 1e-10


def test_isomorphism_mode_merges_relabelings():
    rep = verify_equivalence(make_rigged(0.5, 0.5), wrap_exchangeable(make_gnp(0.5)), 4, 4000, 0.01, 2, mode="isomorphism")
    assert rep.binning == "isomorphism" and rep.equivalent


def test_relabeled_model_differs_labeled_but_not_up_to_isomorphism():
    path = make_explicit(ExplicitDistribution(3, ((LabeledGraph.from_edges(3, [(1, 2), (2, 3)]), 1.0),)))
    other = make_explicit(ExplicitDistribution(3, ((LabeledGraph.from_edges(3, [(1, 3), (2, 3)]), 1.0),)))
    assert verify_equivalence(path, other, 3, 1000, 0.01).verdict == "not equivalent"
    assert verify_equivalence(path, other, 3, 1000, 0.01, mode="isomorphism").equivalent


def test_sparse_table_falls_back_and_reports_it():
    m = make_gnp(0.5)
    rep = verify_equivalence(m, m, 8, 2000, 0.01, master_seed=4)
    assert rep.levels_tried[0] == "labeled" and rep.binning != "labeled"
    strict = verify_equivalence(m, m, 8, 2000, 0.01, master_seed=4, fallback=False)
    assert strict.verdict == "inconclusive"


def test_equivalence_preconditions():
    with pytest.raises(ParameterError):
        verify_equivalence(make_gnp(0.5), make_gnp(0.5), 3, 999)
    with pytest.raises(ParameterError):
        verify_equivalence(make_gnp(0.5), make_gnp(0.5), 9, 1000, mode="isomorphism")


@pytest.mark.parametrize("label", sorted(invariant_families()))
@pytest.mark.parametrize("encode", [encode_theorem1, encode_theorem2], ids=["t1", "t2"])
def test_round_trip_equivalence_across_zoo(label, encode):
    model, _ = invariant_families()[label]
    rep = verify_equivalence(model, encode(model, 4), 4, 2000, 0.01, master_seed=9)
    assert rep.verdict == "equivalent", rep


@pytest.mark.parametrize("encode", [encode_theorem1, encode_theorem2], ids=["t1", "t2"])
@pytest.mark.parametrize("base", [make_rigged(), three_atom(), make_footnote2()], ids=["rigged", "explicit", "fn2"])
def test_round_trip_equivalence_general_bases(base, encode):
    n = 3
    rep = verify_equivalence(base, encode(base, n), n, 2000, 0.01, master_seed=10)
    assert rep.verdict == "equivalent", rep
