import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pac_lab.core import (
    Dataset,
    TripletQuery,
    all_queries,
    embedding_labels,
    labeled,
    metric_labels,
    pth_power_gap,
    validate_metric,
)
from pac_lab.errors import BudgetExceededError, ContradictionError, DomainError, PreconditionError
from pac_lab.shattering import (
    PairOrderDigraph,
    brute_force_vcdim,
    check_shattered,
    consecutive_pair_family,
    construct_metric_for_labeling,
    construct_shattering_embedding,
    deduplicate,
    find_forcing_cycle,
    intersection_class,
    is_realizable_metric,
    labels_from_bits,
    metric_oracle,
    negation_class,
    pair_id,
    pair_of,
    shattering_embedding_queries,
    table_vcdim,
    union_class,
    vc_algebra_check,
)


def nx_realizable(n, queries, labels):
    """Independent check: build the pair digraph with networkx."""
    g = nx.DiGraph()
    g.add_nodes_from(itertools.combinations(range(n), 2))
    for q, lab in zip(queries, labels):
        near, far = (q.first, q.second) if lab < 0 else (q.second, q.first)
        g.add_edge(tuple(sorted((q.anchor, near))), tuple(sorted((q.anchor, far))))
    return nx.is_directed_acyclic_graph(g)


def test_pair_index_bijection():
    for n in range(2, 8):
        ids = [pair_id(i, j, n) for i, j in itertools.combinations(range(n), 2)]
        assert ids == list(range(math.comb(n, 2)))
        assert all(pair_of(pair_id(i, j, n), n) == (i, j) for i, j in itertools.combinations(range(n), 2))
        assert pair_id(n - 1, 0, n) == pair_id(0, n - 1, n)


def test_deduplicate_and_contradiction():
    q = TripletQuery(0, 1, 2)
    out = deduplicate([(q, -1), (q.flipped(), 1)])
    assert len(out) == 1 and out[0].query == q
    with pytest.raises(ContradictionError):
        deduplicate([(q, -1), (q, 1)])
    with pytest.raises(ContradictionError):
        deduplicate([(q, -1), (q.flipped(), -1)])


def test_three_cycle_rejected_with_cycle():
    # rho(01) < rho(02) < rho(12) < rho(01)
    samples = [((0, 1, 2), -1), ((2, 0, 1), -1), ((1, 2, 0), -1)]
    res = is_realizable_metric(Dataset(3), samples)
    assert not res.realizable
    assert sorted(res.cycle) == [(0, 1), (0, 2), (1, 2)]
    assert len(res.cycle_samples) == 3


def test_cross_anchor_cycle_detected():
    # Anchors differ but all constraints live on shared pairs.
    samples = [((0, 1, 2), -1), ((2, 0, 3), -1), ((3, 2, 1), -1), ((1, 3, 0), -1)]
    qs = [TripletQuery(*q) for q, _ in samples]
    labels = [l for _, l in samples]
    assert is_realizable_metric(Dataset(4), samples).realizable == nx_realizable(4, qs, labels)


def test_certificate_in_range_and_reproduces_labels():
    rng = np.random.default_rng(0)
    qs = all_queries(5)
    for _ in range(50):
        idx = rng.choice(len(qs), 8, replace=False)
        sub = [qs[i] for i in idx]
        labels = rng.choice([-1, 1], 8)
        res = is_realizable_metric(Dataset(5), labeled(sub, labels))
        if res.realizable:
            t = res.certificate
            assert validate_metric(t)
            assert np.array_equal(metric_labels(t, sub), labels)
            off = t.values[~np.eye(5, dtype=bool)]
            assert off.min() >= 5 and off.max() <= 10


def test_construct_refuses_cycle():
    with pytest.raises(PreconditionError):
        construct_metric_for_labeling(Dataset(3), [((0, 1, 2), -1), ((2, 0, 1), -1), ((1, 2, 0), -1)])


def test_digraph_edges():
    g = PairOrderDigraph.build(Dataset(3), [((0, 1, 2), -1)])
    assert g.edges == ((pair_id(0, 1, 3), pair_id(0, 2, 3)),)
    assert g.find_cycle() is None and len(g.topological_order()) == 3


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 6), st.data())
def test_oracle_matches_networkx(n, data):
    qs = all_queries(n)
    idx = data.draw(st.lists(st.integers(0, len(qs) - 1), min_size=1, max_size=12, unique=True))
    labels = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(idx), max_size=len(idx)))
    sub = [qs[i] for i in idx]
    res = is_realizable_metric(Dataset(n), labeled(sub, labels))
    assert res.realizable == nx_realizable(n, sub, labels)
    if res.realizable:
        assert np.array_equal(metric_labels(res.certificate, sub), labels)
        assert validate_metric(res.certificate)


@pytest.mark.parametrize("n", [3, 4])
def test_oracle_complete_against_all_pair_orderings(n, order_tables):
    queries, table = order_tables[n]
    rng = np.random.default_rng(n)
    for _ in range(400):
        k = int(rng.integers(1, min(10, len(queries)) + 1))
        idx = rng.choice(len(queries), k, replace=False)
        labels = rng.choice([-1, 1], k).astype(np.int8)
        exists = bool((table[:, idx] == labels).all(axis=1).any())
        assert metric_oracle(Dataset(n), [queries[i] for i in idx], labels) == exists


def independent_vcdim(queries, table):
    best = 0
    for k in range(1, len(queries) + 1):
        if not any(len(np.unique(table[:, list(s)] > 0, axis=0)) == 2 ** k
                   for s in itertools.combinations(range(len(queries)), k)):
            break
        best = k
    return best


@pytest.mark.parametrize("n,expected", [(3, 2), (4, 5)])
def test_vcdim_exact(n, expected, order_tables):
    rep = brute_force_vcdim(Dataset(n))
    assert rep.vcdim == expected == math.comb(n, 2) - 1
    assert rep.vcdim == independent_vcdim(*order_tables[n])
    assert check_shattered(Dataset(n), rep.queries).shattered


def test_vcdim_budget_refusal():
    with pytest.raises(BudgetExceededError):
        brute_force_vcdim(Dataset(5))


def test_vcdim_custom_oracle_and_universe():
    # A class that realizes nothing but all -1 labels has VC dimension 0.
    rep = brute_force_vcdim(Dataset(4), oracle=lambda ds, q, l: all(x < 0 for x in l))
    assert rep.vcdim == 0
    rep = brute_force_vcdim(Dataset(4), universe=consecutive_pair_family(4))
    assert rep.vcdim == 3


def test_shattering_report_text_and_certificates():
    rep = brute_force_vcdim(Dataset(3))
    text = rep.to_text(with_certificates=True)
    assert "vcdim 2" in text and text.count("certificate") == 4
    bad = check_shattered(Dataset(3), all_queries(3))
    assert not bad.shattered and bad.witness_cycle
    with pytest.raises(DomainError):
        next(bad.certificates())


def test_consecutive_family_shattered():
    for n in range(3, 7):
        fam = consecutive_pair_family(n)
        assert len(fam) == (n - 1) * (n - 2) // 2
        rng = np.random.default_rng(n)
        for _ in range(20):
            labels = rng.choice([-1, 1], len(fam))
            t = construct_metric_for_labeling(Dataset(n), labeled(fam, labels))
            assert np.array_equal(metric_labels(t, fam), labels)


@pytest.mark.parametrize("p", [1, 2, 3, 0.5])
def test_shattering_embedding_gap_is_unit(p):
    n, d = 7, 3
    qs = shattering_embedding_queries(n, d)
    assert len(qs) == (n - d) * (d - 1)
    rng = np.random.default_rng(0)
    for _ in range(20):
        bits = rng.integers(0, 2, (n - d, d - 1))
        e = construct_shattering_embedding(n, d, p, bits)
        assert np.array_equal(embedding_labels(e, qs), labels_from_bits(bits))
        gaps = np.array([pth_power_gap(e, q) for q in qs])
        assert np.abs(gaps - labels_from_bits(bits)).max() <= 1e-12


def test_shattering_embedding_domain():
    with pytest.raises(DomainError):
        shattering_embedding_queries(3, 3)
    with pytest.raises(DomainError):
        construct_shattering_embedding(5, 2, 2, np.zeros((2, 1)))


def test_forcing_cycle_triangle():
    qs = [TripletQuery(0, 1, 2), TripletQuery(0, 2, 3), TripletQuery(0, 3, 1)]
    fc = find_forcing_cycle(qs, 4)
    assert fc.anchor == 0 and sorted(fc.vertices) == [1, 2, 3]
    assert not is_realizable_metric(Dataset(4), fc.samples).realizable


def test_forcing_cycle_tree_is_none():
    qs = [TripletQuery(0, 1, 2), TripletQuery(0, 1, 3), TripletQuery(0, 1, 4)]
    assert find_forcing_cycle(qs, 5) is None


def test_forcing_cycle_pigeonhole():
    rng = np.random.default_rng(1)
    for n in (4, 5, 6):
        qs = all_queries(n)
        for _ in range(10):
            idx = rng.choice(len(qs), min(len(qs), n * n), replace=False)
            fc = find_forcing_cycle([qs[i] for i in idx], n)
            assert fc is not None
            assert not is_realizable_metric(Dataset(n), fc.samples).realizable


def test_table_vcdim_examples():
    singletons = np.eye(5, dtype=int)
    assert table_vcdim(singletons) == 1
    assert table_vcdim(negation_class(singletons)) == 1
    power3 = np.array(list(itertools.product([0, 1], repeat=3)))
    assert table_vcdim(power3) == 3
    intervals = np.array([[int(a <= x < b) for x in range(6)] for a in range(7) for b in range(a, 7)])
    assert table_vcdim(intervals) == 2
    rep = vc_algebra_check(intervals, intervals)
    assert rep.holds and rep.vc_union <= 5
    assert table_vcdim(np.zeros((0, 3))) == -1


def test_algebra_union_intersection_shapes():
    a = np.array([[0, 1], [1, 0]])
    b = np.array([[0, 0], [1, 1]])
    assert union_class(a, b).tolist() == [[0, 1], [1, 0], [1, 1]]
    assert intersection_class(a, b).tolist() == [[0, 0], [0, 1], [1, 0]]
    with pytest.raises(BudgetExceededError):
        table_vcdim(np.zeros((2, 21)))
    with pytest.raises(DomainError):
        vc_algebra_check(a, np.zeros((2, 3)))
