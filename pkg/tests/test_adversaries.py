import numpy as np
import pytest

from pac_lab.adversaries import (
    AdversaryConfig,
    QueryDistribution,
    SampleSet,
    TwoPointDistribution,
    VCAdversaryDistribution,
    clean_sample,
    gap_adversary,
    indistinguishable_adversary,
    majority_flip_adversary,
    random_flip_adversary,
    sample_budget,
    synthetic_triplets,
    vc_adversary,
    vc_distribution_masses,
)
from pac_lab.errors import DomainError, PreconditionError
from pac_lab.seeding import derive_seed, make_rng, trial_rng


def outcome_freqs(s):
    q, lab = s.observed()
    n = len(s)
    return (np.count_nonzero(q == 0) / n, np.count_nonzero((q == 1) & (lab < 0)) / n,
            np.count_nonzero((q == 1) & (lab > 0)) / n)


def test_seeding():
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(1, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 23)
    a, b = trial_rng(0, 5).random(4), trial_rng(0, 5).random(4)
    assert np.array_equal(a, b)
    g = make_rng(3)
    assert make_rng(g) is g


def test_sample_budget_degenerate_and_law():
    rng = make_rng(0)
    assert sample_budget(100, 0.0, rng) == 0
    assert sample_budget(100, 1.0, rng) == 100
    m = np.array([sample_budget(10 ** 5, 0.1, rng) for _ in range(1000)])
    assert abs(m.mean() - 10 ** 4) <= 3 * np.sqrt(10 ** 5 * 0.09 / 1000)
    with pytest.raises(DomainError):
        sample_budget(10, 1.5, rng)


def test_indistinguishable_frequencies():
    for target in (1, 2):
        f = outcome_freqs(indistinguishable_adversary(0.1, 10 ** 5, target, make_rng(target)))
        se = np.sqrt(0.1 * 0.9 / 10 ** 5)
        assert np.allclose(f, (0.8, 0.1, 0.1), atol=3 * np.sqrt(0.16 / 10 ** 5) + 3 * se)


def test_indistinguishable_no_noise_is_clean():
    s = indistinguishable_adversary(0.0, 1000, 2, make_rng(0))
    assert s.num_corrupted == 0
    q, lab = s.observed()
    assert np.array_equal(lab, TwoPointDistribution.h2[q])
    with pytest.raises(DomainError):
        indistinguishable_adversary(0.5, 10, 1, make_rng(0))


def test_gap_frequencies_and_budget():
    s = gap_adversary(0.1, 0.05, 10 ** 5, 1, make_rng(1))
    f = outcome_freqs(s)
    # target h1 labels s2 with -1: correct s2 labels are -1
    assert np.allclose(f, (0.75, 0.15, 0.10), atol=0.005)
    assert abs(s.num_corrupted - 10 ** 4) < 4 * np.sqrt(10 ** 5 * 0.09)
    assert gap_adversary(0.0, 0.5, 1000, 2, make_rng(2)).num_corrupted == 0
    with pytest.raises(DomainError):
        gap_adversary(0.45, 0.2, 10, 1, make_rng(0))


def test_budget_law_all_strategies():
    n, eta = 200, 0.1
    counts = {k: [] for k in ("ind", "gap", "vc")}
    for t in range(2000):
        rng = trial_rng(9, t)
        counts["ind"].append(indistinguishable_adversary(eta, n, 1, rng).num_corrupted)
        counts["gap"].append(gap_adversary(eta, 0.05, n, 2, rng).num_corrupted)
        counts["vc"].append(vc_adversary(5, eta, 0.01, n, rng)[0].num_corrupted)
    mean, var = n * eta, n * eta * (1 - eta)
    for c in counts.values():
        c = np.array(c)
        assert abs(c.mean() - mean) <= 3 * np.sqrt(var / c.size)
        assert abs(c.var(ddof=1) / var - 1) <= 3 * np.sqrt(2 / (c.size - 1)) + 0.02


def test_vc_distribution():
    m = vc_distribution_masses(10, 0.05, 0.01)
    assert abs(m.sum() - 1) < 1e-15 and np.allclose(m[1:-1], 0.01)
    s, target = vc_adversary(10, 0.05, 0.01, 10 ** 4, make_rng(3))
    q = s.query_id
    assert abs(np.mean((q > 0) & (q < 9)) - 0.08) < 4 * np.sqrt(0.08 * 0.92 / 10 ** 4)
    last = q == 9
    assert abs(s.corrupted[last].mean() - 0.5) < 0.05
    assert not s.corrupted[~last].any()
    assert set(np.unique(target)) <= {-1, 1} and target.size == 10
    with pytest.raises(PreconditionError):
        VCAdversaryDistribution(2, 0.1, 0.01)
    with pytest.raises(PreconditionError):
        vc_distribution_masses(5, 0.3, 0.1)


def test_config_validation_and_determinism():
    cfg = AdversaryConfig("gap", 0.1, 500, seed=4, gap=0.05)
    a, b = cfg.run(), cfg.run()
    assert a.to_csv(harness=True) == b.to_csv(harness=True)
    s, target = AdversaryConfig("vc", 0.05, 50, seed=1, gap=0.01, d=4).run()
    assert len(s) == 50
    with pytest.raises(DomainError):
        AdversaryConfig("nope", 0.1, 10)
    with pytest.raises(DomainError):
        AdversaryConfig("indistinguishable", 0.6, 10)
    with pytest.raises(DomainError):
        AdversaryConfig("random-flip", 0.1, 10).run()


def test_sample_set_csv_round_trip(tmp_path):
    s = gap_adversary(0.1, 0.05, 50, 2, make_rng(5))
    text = s.to_csv(tmp_path / "s.csv", harness=True)
    assert text.splitlines()[0] == "query_id,anchor,first,second,label,corrupted"
    for src in (text, tmp_path / "s.csv"):
        r = SampleSet.from_csv(src)
        assert np.array_equal(r.label, s.label) and np.array_equal(r.corrupted, s.corrupted)
    learner_view = SampleSet.from_csv(s.to_csv())
    assert learner_view.num_corrupted == 0
    assert synthetic_triplets([0, 2]).tolist() == [[0, 1, 2], [6, 7, 8]]


def test_sample_set_checks_and_modify():
    with pytest.raises(DomainError):
        SampleSet([0, 1], [1], [False])
    with pytest.raises(DomainError):
        SampleSet([0], [0], [False])
    s = SampleSet([0, 1, 2], [1, 1, -1], [False] * 3)
    m = s.modified([0, 2])
    assert m.label.tolist() == [-1, 1, 1] and m.num_corrupted == 2
    r = s.modified([1], labels=[-1], query_ids=[5])
    assert r.query_id.tolist() == [0, 5, 2] and r.label.tolist() == [1, -1, -1]
    neg, pos = s.label_counts(3)
    assert neg.tolist() == [0, 0, 1] and pos.tolist() == [1, 1, 0]


def test_flip_adversaries():
    dist = QueryDistribution(np.full(4, 0.25))
    target = np.array([-1, 1, 1, -1])
    clean = clean_sample(dist, target, 400, make_rng(6))
    assert np.array_equal(clean.label, target[clean.query_id])
    noisy = random_flip_adversary(clean, 0.1, make_rng(7))
    assert np.count_nonzero(noisy.label != clean.label) == noisy.num_corrupted
    masses = np.array([0.7, 0.1, 0.1, 0.1])
    clean = clean_sample(QueryDistribution(masses), target, 100, make_rng(8))
    noisy = majority_flip_adversary(clean, masses, 0.4, make_rng(9))
    assert np.count_nonzero(noisy.label != clean.label) == noisy.num_corrupted
    with pytest.raises(DomainError):
        QueryDistribution([0.5, 0.6])
    assert dist.error(target, -target) == pytest.approx(1.0)
