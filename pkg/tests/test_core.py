import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pac_lab.core import (
    Dataset,
    Embedding,
    Label,
    LabeledSample,
    MetricTable,
    TripletQuery,
    all_queries,
    dumps,
    embedding_labels,
    evaluate_embedding_hypothesis,
    evaluate_metric_hypothesis,
    labeled,
    loads,
    lp_distance,
    metric_labels,
    pth_power_gap,
    validate_metric,
)
from pac_lab.errors import DomainError, TieWarning


def test_dataset_size():
    assert list(Dataset(3).points) == [0, 1, 2]
    for bad in (0, 1, 2.5):
        with pytest.raises(DomainError):
            Dataset(bad)


def test_query_views():
    q = TripletQuery(2, 5, 1)
    assert q.key == (2, 1, 5)
    assert not q.is_canonical
    assert q.canonical() == TripletQuery(2, 1, 5)
    assert q.flipped().flipped() == q
    with pytest.raises(DomainError):
        TripletQuery(1, 1, 2)
    with pytest.raises(DomainError):
        TripletQuery(-1, 0, 2)
    with pytest.raises(DomainError):
        q.check(5)


def test_all_queries_count():
    for n in range(3, 8):
        qs = all_queries(n)
        assert len(qs) == n * (n - 1) * (n - 2) // 2
        assert all(q.is_canonical for q in qs)
        assert len({q.key for q in qs}) == len(qs)


def test_label_flip():
    assert Label.FIRST_CLOSER.flip() is Label.SECOND_CLOSER


def test_metric_hypothesis():
    t = MetricTable([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert evaluate_metric_hypothesis(t, TripletQuery(0, 1, 2)) == Label.FIRST_CLOSER
    assert evaluate_metric_hypothesis(t, TripletQuery(0, 2, 1)) == Label.SECOND_CLOSER
    with pytest.warns(TieWarning):
        assert evaluate_metric_hypothesis(t, TripletQuery(1, 0, 2)) == Label.SECOND_CLOSER


def test_lp_distance_345():
    e = Embedding([[0, 0], [3, 4]], p=2)
    assert lp_distance(e, 0, 1) == 5.0
    assert lp_distance(Embedding([[0, 0], [3, 4]], p=1), 0, 1) == 7.0


def test_power_gap_sign_matches_distance():
    rng = np.random.default_rng(1)
    for p in (1.0, 1.5, 2.0, 3.0):
        e = Embedding(rng.normal(size=(6, 3)), p)
        for q in all_queries(6):
            assert np.sign(pth_power_gap(e, q)) == int(evaluate_embedding_hypothesis(e, q))
        qs = all_queries(6)
        assert np.array_equal(embedding_labels(e, qs), embedding_labels(e, qs, power_gap=True))


def test_vectorized_labels_match_scalar():
    rng = np.random.default_rng(2)
    e = Embedding(rng.normal(size=(5, 2)))
    t = e.table()
    qs = all_queries(5)
    assert [int(evaluate_metric_hypothesis(t, q)) for q in qs] == list(metric_labels(t, qs))


def test_tie_warning_vectorized():
    e = Embedding([[0.0], [1.0], [-1.0]])
    with pytest.warns(TieWarning):
        assert embedding_labels(e, [TripletQuery(0, 1, 2)])[0] == 1


def test_embedding_cap_and_inputs():
    with pytest.raises(DomainError):
        Embedding([[3, 4], [0, 0]], cap=4.9)
    Embedding([[3, 4], [0, 0]], cap=5)
    with pytest.raises(DomainError):
        Embedding([[0, np.nan], [0, 0]])
    with pytest.raises(DomainError):
        Embedding([[0], [1]], p=0)
    with pytest.raises(DomainError):
        MetricTable(np.zeros((2, 3)))


def test_validate_metric_reports():
    good = Embedding(np.random.default_rng(3).normal(size=(6, 2))).table()
    assert validate_metric(good, tol=1e-12)
    v = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    rep = validate_metric(MetricTable(v))
    assert rep.triangle == [(0, 1, 2)]
    v2 = np.array([[1, 2], [3, 0]], dtype=float)
    rep2 = validate_metric(MetricTable(v2))
    assert rep2.asymmetric == [(0, 1)] and rep2.nonzero_diagonal == [0]
    rep3 = validate_metric(MetricTable([[0, -1], [-1, 0]]))
    assert len(rep3.negative) == 2 and not rep3.is_metric


def test_serialization_round_trip():
    e = Embedding(np.random.default_rng(4).normal(size=(4, 3)), p=1.5, cap=10.0)
    e2 = loads(dumps(e))
    assert np.array_equal(e.coords, e2.coords) and e2.p == 1.5 and e2.cap == 10.0
    t = e.table()
    assert np.array_equal(loads(dumps(t)).values, t.values)
    assert loads(dumps(Dataset(7))) == Dataset(7)
    qs = all_queries(4)
    assert loads(dumps(qs)) == qs
    samples = labeled(qs[:3], [-1, 1, -1])
    assert loads(dumps(samples)) == samples


def test_loads_errors():
    with pytest.raises(DomainError):
        loads("nonsense\n")
    with pytest.raises(DomainError):
        loads("pac-lab metric\nN 3\n0 1\n1 0\n")
    with pytest.raises(DomainError):
        loads("pac-lab widget\n")
    with pytest.raises(DomainError):
        labeled(all_queries(3), [1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5), st.sampled_from([-1, 1]),
                          st.booleans()), max_size=10))
def test_labeled_round_trip_property(rows):
    samples = [LabeledSample(TripletQuery(a, b, c), Label(l), k) for a, b, c, l, k in rows
               if len({a, b, c}) == 3]
    assert loads(dumps(samples)) == samples


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(1, 4), st.floats(0.5, 4), st.integers(0, 2 ** 32 - 1))
def test_float_round_trip_is_exact(n, d, p, seed):
    e = Embedding(np.random.default_rng(seed).normal(size=(n, d)), p)
    assert np.array_equal(loads(dumps(e)).coords, e.coords)
