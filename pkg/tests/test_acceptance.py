"""Acceptance criteria, one test and one printed PASS/FAIL line each.

Run directly (``python tests/test_acceptance.py``) or through pytest.
"""
import itertools
import math
import time

import numpy as np
import pytest

from pac_lab import cli
from pac_lab.core import Dataset, all_queries
from pac_lab.experiments import ExperimentConfig, run
from pac_lab.learners import train_embedding
from pac_lab.rademacher import (
    ContrastiveBatch,
    LinearEmbeddingClass,
    bound_validity_trials,
    lipschitz_check_binary,
    lipschitz_check_distance,
    rademacher_estimate,
)
from pac_lab.seeding import make_rng
from pac_lab.shattering import brute_force_vcdim, find_forcing_cycle, is_realizable_metric, vc_algebra_check
from pac_lab import bounds as bd

from conftest import ordering_label_table


@pytest.fixture
def report(capsys):
    def emit(num, ok, text):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{num}] {text}")
        assert ok, text
    return emit


def _independent_vcdim(n):
    queries, table = ordering_label_table(n)
    best = 0
    for k in range(1, len(queries) + 1):
        if not any(len(np.unique(table[:, list(s)], axis=0)) == 2 ** k
                   for s in itertools.combinations(range(len(queries)), k)):
            break
        best = k
    return best


def test_01_exact_vc(report):
    t0 = time.perf_counter()
    got = {n: brute_force_vcdim(Dataset(n)).vcdim for n in (3, 4)}
    elapsed = time.perf_counter() - t0
    ref = {n: _independent_vcdim(n) for n in (3, 4)}
    ok = got == ref == {3: 2, 4: 5} and elapsed < 10
    report(1, ok, f"exact VC: N=3 -> {got[3]}, N=4 -> {got[4]} (orderings oracle {ref}), {elapsed:.2f}s")


def test_02_metric_certificates(report):
    fails = {}
    for n in range(4, 9):
        res = run(ExperimentConfig.build("construct", {"family": "consecutive", "N": n, "trials": 1000}, seed=n))
        fails[n] = res.summary["failures"]
    report(2, sum(fails.values()) == 0, f"consecutive-pair certificates, 1000 labelings for N=4..8: failures {fails}")


def test_03_embedding_certificates(report):
    fails, worst, combos = 0, 0.0, 0
    for d in range(2, 6):
        for n in range(d + 1, 11):
            for p in (1, 2, 3):
                res = run(ExperimentConfig.build(
                    "construct", {"family": "embedding", "N": n, "d": d, "p": p, "trials": 1000},
                    seed=100 * n + 10 * d + p))
                fails += res.summary["failures"]
                worst = max(worst, max(r.values["max_gap_error"] for r in res.records))
                combos += 1
    report(3, fails == 0 and worst <= 1e-12,
           f"l_p shattering construction, {combos} (N,d,p) cases x 1000: failures {fails}, max |gap|-1 error {worst:g}")


def test_04_cycle_refutation(report):
    rng = make_rng(4)
    instances, rejected, min_loss = 0, 0, math.inf
    for n in (4, 5, 6, 7):
        qs = all_queries(n)
        for _ in range(3):
            idx = rng.choice(len(qs), min(len(qs), n * n), replace=False)
            fc = find_forcing_cycle([qs[i] for i in idx], n)
            instances += 1
            rejected += not is_realizable_metric(Dataset(n), fc.samples).realizable
            res = train_embedding(fc.samples, n, 2, 2.0, steps=300, seed=int(rng.integers(2 ** 32)), restarts=20)
            min_loss = min(min_loss, res.loss)
    ok = rejected == instances and min_loss > 1e-3 / 2
    report(4, ok, f"forcing cycles: {rejected}/{instances} rejected by the oracle, "
                  f"min hinge loss over 20 restarts {min_loss:.2e} > margin/2 = 5e-4")


def test_05_indistinguishability(report):
    res = run(ExperimentConfig.build("adversary-sim", {"eta": 0.1, "n": 10 ** 6}, seed=5))
    worst = max(abs(r.values["difference"]) / r.values["se_difference"] for r in res.records
                if r.values["se_difference"] > 0)
    freqs = [round(r.values["freq_h1"], 4) for r in res.records]
    report(5, res.passed, f"eta=0.1, n=1e6: max |h1-h2| = {worst:.2f} SE, h1 frequencies {freqs}")


def test_06_bayes_regime(report):
    res = run(ExperimentConfig.build("bayes-lb", {"trials": 10 ** 5, "scale": 10}, seed=6))
    s = res.summary
    ok = res.passed
    report(6, ok, f"Bayes majority: n={s['regime_n']} failure {s['regime_failure']:.4f} "
                  f"(exact {s['regime_exact']:.4f}) vs 1/342 = {1 / 342:.4f}; "
                  f"10x n={s['scaled_n']} failure {s['scaled_failure']:.4f} (exact {s['scaled_exact']:.4f}), "
                  f"needs < 1/342")


def test_07_vc_regime(report):
    res = run(ExperimentConfig.build("vc-lb", {"trials": 10 ** 4, "scale": 1}, seed=7))
    s = res.summary
    report(7, res.passed, f"VC adversary d=12, n={s['regime_n']}: ERM failure {s['regime_failure']:.4f} "
                          f"vs 1/12 = {1 / 12:.4f}")


def test_08_erm_upper_bound(report):
    res = run(ExperimentConfig.build("erm-curve", {}, seed=8))
    s = res.summary
    n = s["n"]
    sizes = (n, 200, 1000, 5000)
    conc = [bd.verify_budget_concentration(m, 0.05, 0.2, 10 ** 5, seed=m) for m in sizes]
    conc_ok = all(r.exact <= r.bound for r in conc)
    ok = res.passed and conc_ok
    report(8, ok, f"ERM at calibrated c={s['c']:g}, n={n}: success {s['success_fraction']:.3f} >= 0.95; "
                  f"budget tail exact <= exp(-n gap^2/8) at n in {list(sizes)}: {conc_ok}")


def test_09_tail_claims(report):
    res = run(ExperimentConfig.build("verify", {"trials": 10 ** 5}, seed=9))
    n35 = sum(k.startswith("claim_3_5_upper") for k in res.verdicts)
    n37 = sum(k.startswith("claim_3_7") for k in res.verdicts)
    ok = res.passed and n35 >= 5 and n37 >= 5
    report(9, ok, f"tail claims: {n35} binomial anti-concentration and {n37} reverse-Markov "
                  f"parameterizations, all verdicts {'pass' if res.passed else 'not all pass'}")


def test_10_vc_algebra(report):
    rng = make_rng(10)
    bad = 0
    for _ in range(100):
        u = int(rng.integers(3, 8))
        a = rng.integers(0, 2, (int(rng.integers(1, 10)), u))
        b = rng.integers(0, 2, (int(rng.integers(1, 10)), u))
        bad += not vc_algebra_check(a, b).holds
    report(10, bad == 0, f"VC algebra on 100 random classes: {bad} violations")


def test_11_rademacher_suite(report):
    t0 = time.perf_counter()
    ld = lipschitz_check_distance(10 ** 5, seed=11)
    lb = lipschitz_check_binary(10 ** 5, seed=12)
    tiny = ContrastiveBatch(np.ones((1, 1)), np.ones((1, 1, 1)))
    est = rademacher_estimate(tiny, LinearEmbeddingClass(1, 1, 1.0), 10 ** 4, seed=13)
    exact = np.mean([abs(s1 + s2) for s1, s2 in itertools.product((-1, 1), repeat=2)])
    tiny_ok = abs(est.value - exact) <= 3 * est.stderr
    bv = bound_validity_trials(splits=200, seed=14)
    elapsed = time.perf_counter() - t0
    parts = {
        "distance Lipschitz <= 1": ld.verdict,
        "binary Lipschitz <= 2": lb.verdict,
        "tiny oracle": tiny_ok,
        "bound validity": bv.verdict,
        "runtime < 300s": elapsed < 300,
    }
    report(11, all(parts.values()),
           f"contrastive suite: distance max ratio {ld.max_ratio:.4f} (bound 1), binary {lb.max_ratio:.4f} (bound 2), "
           f"tiny {est.value:.3f}+-{est.stderr:.3f} vs {exact:g}, violations {bv.violations}/200, "
           f"{elapsed:.1f}s; failing: {[k for k, v in parts.items() if not v]}")


DETERMINISM = {
    "vcdim": [], "realizable": [], "construct": ["trials=200"], "adversary-sim": ["n=100000"],
    "erm-curve": ["trials=50", "calib_trials=50"], "bayes-lb": ["trials=2000"], "vc-lb": ["trials=1000"],
    "verify": ["trials=10000"], "bounds": [], "rademacher": ["splits=5", "draws=100", "lipschitz_trials=1000"],
}


def test_12_determinism(report, tmp_path):
    same = {}
    for name, sets in DETERMINISM.items():
        outs = []
        for rep in range(2):
            path = tmp_path / f"{name}{rep}.csv"
            args = [name, "--seed", "12", "--out", str(path)]
            for s in sets:
                args += ["--set", s]
            cli.main(args)
            outs.append(path.read_bytes())
        same[name] = outs[0] == outs[1] and len(outs[0]) > 0
    report(12, all(same.values()), f"byte-identical CSV on rerun for {sum(same.values())}/{len(same)} experiments")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
