"""Seeded experiments behind the ``pac-lab`` command.

Each experiment reads a flat ``key = value`` config, runs independent
trials on per-trial Philox substreams (``derive_seed(master, ...)``), and
returns :class:`TrialRecord` rows plus named pass/fail verdicts.  The CSV
written from the records excludes wall time, so a rerun with the same
master seed produces the same bytes.
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import bounds as bd
from .adversaries import (
    QueryDistribution,
    TwoPointDistribution,
    VCAdversaryDistribution,
    clean_sample,
    gap_adversary,
    indistinguishable_adversary,
    majority_flip_adversary,
    vc_adversary,
)
from .core import Dataset, all_queries, labeled, loads, metric_labels, validate_metric
from .errors import DomainError
from .learners import bayes_majority, disagreement_counts, erm, power_set_class
from .rademacher import (
    LinearEmbeddingClass,
    bound_validity_trials,
    empirical_risk,
    generalization_bound,
    hinge_loss_spec,
    lipschitz_check_binary,
    lipschitz_check_distance,
    loads_batch,
    rademacher_estimate,
    synthetic_batch,
)
from .seeding import derive_seed, make_rng
from .shattering import (
    brute_force_vcdim,
    consecutive_pair_family,
    construct_metric_for_labeling,
    construct_shattering_embedding,
    is_realizable_metric,
    labels_from_bits,
    pair_id,
    shattering_embedding_queries,
)

# -- config --------------------------------------------------------------------

def _intlist(s: str) -> tuple:
    return tuple(int(x) for x in s.replace(",", " ").split())


def _floatlist(s: str) -> tuple:
    return tuple(float(x) for x in s.replace(",", " ").split())


def _tuples(s: str) -> tuple:
    """``"1000:0.5, 500:0.3"`` -> ``((1000.0, 0.5), (500.0, 0.3))``."""
    return tuple(tuple(float(v) for v in item.split(":")) for item in s.replace(",", " ").split())


_PARSERS = {int: int, float: float, str: str, "ints": _intlist, "floats": _floatlist, "tuples": _tuples}


@dataclass
class ExperimentConfig:
    """Experiment id, master seed, output path and typed scenario parameters."""

    experiment: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None

    @classmethod
    def from_text(cls, text: str, experiment: str | None = None) -> "ExperimentConfig":
        raw = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"config line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in raw:
                raise DomainError(f"config line {lineno}: duplicate key {key!r}")
            raw[key] = value
        exp = raw.pop("experiment", None)
        if experiment is not None and exp is not None and exp != experiment:
            raise DomainError(f"config is for {exp!r}, not {experiment!r}")
        exp = experiment or exp
        if exp is None:
            raise DomainError("config names no experiment")
        seed = int(raw.pop("seed", 0))
        out = raw.pop("out", None)
        return cls.build(exp, raw, seed, out)

    @classmethod
    def build(cls, experiment: str, raw: dict | None = None, seed: int = 0, out=None) -> "ExperimentConfig":
        """Parse string values against the experiment's schema and fill defaults."""
        if experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {experiment!r}; choose from {sorted(EXPERIMENTS)}")
        schema = EXPERIMENTS[experiment].params
        params = {k: default for k, (_, default) in schema.items()}
        for key, value in (raw or {}).items():
            if key not in schema:
                raise DomainError(f"unknown parameter {key!r} for {experiment}")
            kind = schema[key][0]
            try:
                params[key] = value if not isinstance(value, str) else _PARSERS[kind](value)
            except ValueError as exc:
                raise DomainError(f"bad value for {key}: {value!r}") from exc
        return cls(experiment, params, int(seed), out)


@dataclass
class TrialRecord:
    """One CSV row.  ``wall_time`` is kept for reporting and left out of the CSV."""

    experiment: str
    trial: int
    seed: int
    values: dict
    wall_time: float = 0.0


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    columns: list
    records: list
    verdicts: dict
    summary: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "trial", "seed", *self.columns])
        for r in self.records:
            w.writerow([r.experiment, r.trial, r.seed, *(_cell(r.values[c]) for c in self.columns)])
        return buf.getvalue()

    def report(self) -> str:
        lines = [f"{self.config.experiment} seed={self.config.seed} "
                 f"records={len(self.records)} time={self.wall_time:.2f}s"]
        lines += [f"  {k} = {_cell(v)}" for k, v in self.summary.items()]
        lines += [f"  {'PASS' if ok else 'FAIL'} {name}" for name, ok in self.verdicts.items()]
        return "\n".join(lines)


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _record(cfg, trial, seed, t0, **values) -> TrialRecord:
    return TrialRecord(cfg.experiment, trial, seed, values, time.perf_counter() - t0)


def _frac_se(hits, trials) -> tuple[float, float]:
    f = hits / trials
    return f, math.sqrt(f * (1 - f) / trials)


# -- experiments ---------------------------------------------------------------

def run_vcdim(cfg: ExperimentConfig) -> ExperimentResult:
    """Exhaustive VC dimension of the arbitrary-distance class on ``N`` points."""
    p = cfg.params
    t0 = time.perf_counter()
    rep = brute_force_vcdim(Dataset(p["N"]), budget=p["budget"])
    expected = math.comb(p["N"], 2) - 1
    rec = _record(cfg, 0, cfg.seed, t0, N=p["N"], vcdim=rep.vcdim, expected=expected,
                  oracle_calls=rep.oracle_calls,
                  queries=" ".join("{}-{}-{}".format(*q.as_tuple()) for q in rep.queries))
    return ExperimentResult(cfg, ["N", "vcdim", "expected", "oracle_calls", "queries"], [rec],
                            {"vcdim_equals_pairs_minus_one": rep.vcdim == expected})


def _cycle_ok(res, n) -> bool:
    """Each labeled step goes from the cycle's current pair to the next one."""
    cyc = [pair_id(i, j, n) for i, j in res.cycle]
    for t, s in enumerate(res.cycle_samples):
        q = s.query
        near, far = (q.first, q.second) if s.label < 0 else (q.second, q.first)
        if (pair_id(q.anchor, near, n), pair_id(q.anchor, far, n)) != (cyc[t], cyc[(t + 1) % len(cyc)]):
            return False
    return True


def _check_realizability(dataset, samples):
    res = is_realizable_metric(dataset, samples)
    if res.realizable:
        q = [s.query for s in samples]
        lab = np.array([int(s.label) for s in samples])
        ok = bool(validate_metric(res.certificate)) and np.array_equal(metric_labels(res.certificate, q), lab)
        return res, ok, 0
    return res, _cycle_ok(res, dataset.size), len(res.cycle)


def run_realizable(cfg: ExperimentConfig) -> ExperimentResult:
    """Decide realizability of labeled query sets and check every certificate.

    With ``labeled = path`` the file is checked; otherwise ``trials`` random
    labelings of ``queries`` random distinct queries on ``N`` points are.
    """
    p = cfg.params
    cols = ["N", "num_queries", "realizable", "cycle_length", "certificate_ok"]
    records = []
    if p["labeled"]:
        t0 = time.perf_counter()
        samples = loads(Path(p["labeled"]).read_text())
        n = p["N"] or 1 + max(max(s.query.as_tuple()) for s in samples)
        res, ok, clen = _check_realizability(Dataset(n), samples)
        records.append(_record(cfg, 0, cfg.seed, t0, N=n, num_queries=len(samples),
                               realizable=res.realizable, cycle_length=clen, certificate_ok=ok))
    else:
        universe = all_queries(p["N"])
        k = min(p["queries"], len(universe))
        for t in range(p["trials"]):
            t0 = time.perf_counter()
            seed = derive_seed(cfg.seed, t)
            rng = make_rng(seed)
            idx = np.sort(rng.choice(len(universe), size=k, replace=False))
            labels = rng.choice([-1, 1], size=k)
            res, ok, clen = _check_realizability(Dataset(p["N"]), labeled([universe[i] for i in idx], labels))
            records.append(_record(cfg, t, seed, t0, N=p["N"], num_queries=k, realizable=res.realizable,
                                   cycle_length=clen, certificate_ok=ok))
    n_real = sum(r.values["realizable"] for r in records)
    return ExperimentResult(cfg, cols, records,
                            {"certificates_verified": all(r.values["certificate_ok"] for r in records)},
                            {"realizable": n_real, "unrealizable": len(records) - n_real})


def _embedding_gaps(coords, q, p):
    a, f, s = q[:, 0], q[:, 1], q[:, 2]
    return (np.abs(coords[a] - coords[f]) ** p).sum(1) - (np.abs(coords[a] - coords[s]) ** p).sum(1)


def run_construct(cfg: ExperimentConfig) -> ExperimentResult:
    """Certificate suite for the two shattering constructions.

    ``family = consecutive``: metrics for random labelings of the
    consecutive-pair family, checked for the metric axioms, the ``[N, 2N]``
    range and every label.  ``family = embedding``: the l_p construction for
    random bit patterns, checked for every label and a p-th-power gap of
    exactly +-1.
    """
    p = cfg.params
    fam = p["family"]
    if fam not in ("consecutive", "embedding"):
        raise DomainError(f"family must be 'consecutive' or 'embedding', got {fam!r}")
    n = p["N"]
    records = []
    if fam == "consecutive":
        queries = consecutive_pair_family(n)
        cols = ["N", "labels_ok", "is_metric", "min_distance", "max_distance", "ok"]
        for t in range(p["trials"]):
            t0 = time.perf_counter()
            seed = derive_seed(cfg.seed, t)
            labels = make_rng(seed).choice([-1, 1], size=len(queries))
            table = construct_metric_for_labeling(Dataset(n), labeled(queries, labels))
            off = table.values[~np.eye(n, dtype=bool)]
            labels_ok = bool(np.array_equal(metric_labels(table, queries), labels))
            is_metric = bool(validate_metric(table))
            ok = labels_ok and is_metric and off.min() >= n and off.max() <= 2 * n
            records.append(_record(cfg, t, seed, t0, N=n, labels_ok=labels_ok, is_metric=is_metric,
                                   min_distance=float(off.min()), max_distance=float(off.max()), ok=ok))
    else:
        d, power = p["d"], p["p"]
        queries = shattering_embedding_queries(n, d)
        q = np.array([x.as_tuple() for x in queries])
        cols = ["N", "d", "p", "labels_ok", "max_gap_error", "ok"]
        for t in range(p["trials"]):
            t0 = time.perf_counter()
            seed = derive_seed(cfg.seed, t)
            bits = make_rng(seed).integers(0, 2, (n - d, d - 1))
            e = construct_shattering_embedding(n, d, power, bits)
            want = labels_from_bits(bits)
            gaps = _embedding_gaps(e.coords, q, power)
            labels_ok = bool(np.array_equal(np.where(gaps < 0, -1, 1), want))
            gap_err = float(np.abs(gaps - want).max())
            records.append(_record(cfg, t, seed, t0, N=n, d=d, p=power, labels_ok=labels_ok,
                                   max_gap_error=gap_err, ok=labels_ok and gap_err <= 1e-12))
    fails = sum(not r.values["ok"] for r in records)
    return ExperimentResult(cfg, cols, records, {f"{fam}_certificates": fails == 0}, {"failures": fails})


_OUTCOMES = (("s1", -1), ("s1", 1), ("s2", -1), ("s2", 1))


def run_indistinguishability(cfg: ExperimentConfig) -> ExperimentResult:
    """Observed-sample histograms under the two targets, drawn on separate substreams."""
    p = cfg.params
    eta, n = p["eta"], p["n"]
    seeds = [derive_seed(cfg.seed, target) for target in (1, 2)]
    t0 = time.perf_counter()
    freqs = []
    for target, seed in zip((1, 2), seeds):
        s = indistinguishable_adversary(eta, n, target, make_rng(seed))
        qid, lab = s.observed()
        freqs.append([np.count_nonzero((qid == int(q[1]) - 1) & (lab == y)) / n for q, y in _OUTCOMES])
    expected = [1 - 2 * eta, 0.0, eta, eta]
    records, ok_diff, ok_exp = [], True, True
    for i, (q, y) in enumerate(_OUTCOMES):
        f1, f2, e = freqs[0][i], freqs[1][i], expected[i]
        se = math.sqrt(e * (1 - e) / n)
        diff = f1 - f2
        within_diff = abs(diff) <= 4 * math.sqrt(2) * se
        within_exp = max(abs(f1 - e), abs(f2 - e)) <= 4 * se
        ok_diff &= within_diff
        ok_exp &= within_exp
        records.append(_record(cfg, i, seeds[0], t0, outcome=f"{q}:{y:+d}", seed_h2=seeds[1], freq_h1=f1,
                               freq_h2=f2, expected=e, difference=diff, se_difference=math.sqrt(2) * se,
                               within_4se=within_diff and within_exp))
    cols = ["outcome", "seed_h2", "freq_h1", "freq_h2", "expected", "difference", "se_difference", "within_4se"]
    summary = {}
    if eta == 0:
        # s2 carries mass 2 eta = 0 and is never drawn: there is nothing to compare.
        summary["note"] = "eta = 0: adversary inactive, indistinguishability does not apply"
        verdicts = {}
    else:
        verdicts = {"paired_histograms_within_4se": ok_diff, "frequencies_match_expected": ok_exp}
    return ExperimentResult(cfg, cols, records, verdicts, summary)


def pac_sample_size(c: float, gap: float, d: int, delta: float) -> int:
    """``ceil((c / gap^2)(d + ln(2/delta)))``."""
    return bd._ceil(c / gap ** 2 * (d + math.log(2 / delta)))


def _erm_trial(cls, dist, eta, gap, n, seed):
    rng = make_rng(seed)
    target = cls.table[rng.integers(cls.size)]
    clean = clean_sample(dist, target, n, rng)
    noisy = majority_flip_adversary(clean, dist.masses, eta, rng)
    out = erm(cls, noisy, dist, target)
    thr = n * (eta + gap / 4)
    qid = noisy.query_id
    clean_dis = int(np.count_nonzero(cls.table[out.hypothesis][qid] != target[qid]))
    # Few observed mistakes and a small budget imply few clean mistakes.
    doubling_ok = not (out.disagreements <= thr and noisy.num_corrupted <= thr) or clean_dis <= 2 * thr
    return out, noisy.num_corrupted, clean_dis, doubling_ok


def run_erm_curve(cfg: ExperimentConfig) -> ExperimentResult:
    """Success fraction of exhaustive ERM against a majority-flipping adversary.

    The class is the power set on ``d`` queries with uniform query masses;
    success means true error at most ``2 eta + gap``.  With ``c = 0`` the
    constant is calibrated: the smallest ``c`` on ``c_grid`` whose
    calibration run (its own substreams) reaches ``1 - delta/2``, leaving
    room for Monte Carlo noise in the check that follows.  The
    calibrated ``n`` is then checked on fresh substreams and the curve is
    traced over ``n_grid``.
    """
    p = cfg.params
    eta, gap, delta, d, trials = p["eta"], p["gap"], p["delta"], p["d"], p["trials"]
    if not 0 <= eta < 0.5 or gap <= 0 or not 0 < delta < 1:
        raise DomainError("need 0 <= eta < 1/2, gap > 0, 0 < delta < 1")
    cls = power_set_class(d)
    dist = QueryDistribution(np.full(d, 1 / d))
    goal = 2 * eta + gap + 1e-12
    records = []

    def sweep(phase, code, n, c, ntrials):
        hits = 0
        for t in range(ntrials):
            t0 = time.perf_counter()
            seed = derive_seed(cfg.seed, code, n, t)
            out, m, clean_dis, dbl = _erm_trial(cls, dist, eta, gap, n, seed)
            ok = out.true_error <= goal
            hits += ok
            records.append(_record(cfg, t, seed, t0, phase=phase, c=c, n=n, budget=m,
                                   disagreements=out.disagreements, clean_disagreements=clean_dis,
                                   true_error=out.true_error, success=ok, doubling_ok=dbl))
        return hits / ntrials

    c = p["c"]
    if c == 0:
        for c in p["c_grid"]:
            if sweep("calibrate", 1, pac_sample_size(c, gap, d, delta), c, p["calib_trials"]) >= 1 - delta / 2:
                break
        else:
            raise DomainError("no c on the grid reached 1 - delta/2; extend c_grid")
    n_star = pac_sample_size(c, gap, d, delta)
    frac = sweep("verify", 2, n_star, c, trials)
    curve = {}
    for n in p["n_grid"]:
        curve[n] = sweep("curve", 3, n, c, trials)
    ns = sorted(curve)
    monotone = all(curve[b] >= curve[a] - 3 * math.sqrt(0.25 / trials) * math.sqrt(2)
                   for a, b in zip(ns, ns[1:]))
    cols = ["phase", "c", "n", "budget", "disagreements", "clean_disagreements", "true_error",
            "success", "doubling_ok"]
    summary = {"c": c, "n": n_star, "success_fraction": frac}
    summary.update({f"curve_n{n}": curve[n] for n in ns})
    return ExperimentResult(cfg, cols, records, {
        "success_at_least_1_minus_delta": frac >= 1 - delta,
        "doubling_holds_every_trial": all(r.values["doubling_ok"] for r in records),
        "curve_nondecreasing_within_3se": monotone,
    }, summary)


def run_bayes_lower_bound(cfg: ExperimentConfig) -> ExperimentResult:
    """Failure frequency of the majority vote against the gap adversary.

    A trial fails when the chosen classifier has true error at least
    ``eps = 2 eta + gap``, i.e. when it is the wrong one of the two.  With
    ``scale > 1`` a second run at ``scale * n`` probes the exit from the
    lower-bound regime.
    """
    p = cfg.params
    eta, gap = p["eta"], p["gap"]
    win = bd.bayes_window(eta, gap, p["delta"])
    n = p["n"] or math.ceil(win.n_max) - 1
    if n >= win.n_max:
        raise DomainError(f"n = {n} is not below 17 eta(1-eta)/(37 gap^2) = {win.n_max:.3f}")
    eps = win.eps
    records, summary, verdicts = [], {"eps": eps, "n_max": win.n_max}, {}
    runs = [("regime", n)] + ([("scaled", round(p["scale"] * n))] if p["scale"] > 1 else [])
    for code, (phase, size) in enumerate(runs):
        fails = 0
        for t in range(p["trials"]):
            t0 = time.perf_counter()
            seed = derive_seed(cfg.seed, code, t)
            rng = make_rng(seed)
            target = int(rng.integers(1, 3))
            s = gap_adversary(eta, gap, size, target, rng)
            pick = bayes_majority(s)
            dist = TwoPointDistribution(np.array([1 - eps, eps]), target)
            h = TwoPointDistribution.h1 if pick == 1 else TwoPointDistribution.h2
            err = dist.error(h, dist.target_labels)
            failed = err >= eps - 1e-12
            fails += failed
            records.append(_record(cfg, t, seed, t0, phase=phase, n=size, target=target, chosen=pick,
                                   true_error=err, failure=failed))
        f, se = _frac_se(fails, p["trials"])
        summary[f"{phase}_n"] = size
        summary[f"{phase}_failure"] = f
        summary[f"{phase}_exact"] = bayes_failure_probability(eta, gap, size)
        if phase == "regime":
            verdicts["failure_above_1_342"] = f > 1 / 342 - 3 * se
        else:
            verdicts["scaled_failure_below_1_342"] = f < 1 / 342
    return ExperimentResult(cfg, ["phase", "n", "target", "chosen", "true_error", "failure"],
                            records, verdicts, summary)


def bayes_failure_probability(eta: float, gap: float, n: int) -> float:
    """Exact probability that the majority vote picks the wrong classifier.

    Each draw is a correct ``s2`` label w.p. ``eta + gap``, a flipped one
    w.p. ``eta`` and ``s1`` otherwise; ties go to ``h1``, so the answer is
    the average over the two targets.
    """
    a, b = eta + gap, eta
    log_c2 = bd.binomial_log_pmf(n, a + b)   # number of s2 draws
    wrong_t1 = wrong_t2 = 0.0
    for k in range(n + 1):
        w = math.exp(log_c2[k])
        if w < 1e-300:
            continue
        pj = np.exp(bd.binomial_log_pmf(k, a / (a + b)))   # correct labels among them
        j = np.arange(k + 1)
        # target h1: wrong iff flipped (+1) outnumber correct (-1); target h2: iff flipped >= correct
        wrong_t1 += w * pj[k - j > j].sum()
        wrong_t2 += w * pj[k - j >= j].sum()
    return 0.5 * (wrong_t1 + wrong_t2)


def run_vc_lower_bound(cfg: ExperimentConfig) -> ExperimentResult:
    """Failure frequency of exhaustive ERM over the power set against the VC adversary."""
    p = cfg.params
    d, eta, gap = p["d"], p["eta"], p["gap"]
    eps = 2 * eta + gap
    n_max = bd.vc_window(d, eps, gap, p["delta"])
    n = p["n"] or math.floor(n_max)
    if n > n_max:
        raise DomainError(f"n = {n} exceeds (d-2)/(32 gap) = {n_max:.3f}")
    cls = power_set_class(d)
    dist = VCAdversaryDistribution(d, eta, gap)
    records, summary, verdicts = [], {"eps": eps, "n_max": n_max}, {}
    runs = [("regime", n)] + ([("scaled", round(p["scale"] * n))] if p["scale"] > 1 else [])
    for code, (phase, size) in enumerate(runs):
        fails = 0
        for t in range(p["trials"]):
            t0 = time.perf_counter()
            seed = derive_seed(cfg.seed, code, t)
            s, target = vc_adversary(d, eta, gap, size, make_rng(seed))
            out = erm(cls, s, dist, target)
            failed = out.true_error >= eps - 1e-12
            fails += failed
            records.append(_record(cfg, t, seed, t0, phase=phase, n=size, disagreements=out.disagreements,
                                   true_error=out.true_error, failure=failed))
        f, se = _frac_se(fails, p["trials"])
        summary[f"{phase}_n"] = size
        summary[f"{phase}_failure"] = f
        if phase == "regime":
            verdicts["failure_above_1_12"] = f > 1 / 12 - 3 * se
        else:
            summary["scaled_below_regime"] = f < summary["regime_failure"]
    return ExperimentResult(cfg, ["phase", "n", "disagreements", "true_error", "failure"],
                            records, verdicts, summary)


def run_verify(cfg: ExperimentConfig) -> ExperimentResult:
    """Exact and Monte Carlo checks of the binomial tail claims."""
    p = cfg.params
    trials = p["trials"]
    reports = []
    for i, (n, prob) in enumerate(p["claim35"]):
        reports += bd.verify_claim_3_5(int(n), prob, trials, derive_seed(cfg.seed, 0, i))
    for i, (n, alpha, beta) in enumerate(p["claim37"]):
        reports.append(bd.verify_claim_3_7(alpha, beta, bd.DiscreteLaw.binomial(int(n), alpha), trials,
                                           derive_seed(cfg.seed, 1, i)))
    for i, (n, eta, gap) in enumerate(p["budget"]):
        reports.append(bd.verify_budget_concentration(int(n), eta, gap, trials, derive_seed(cfg.seed, 2, i)))
    seeds = ([derive_seed(cfg.seed, 0, i) for i in range(len(p["claim35"])) for _ in (0, 1)]
             + [derive_seed(cfg.seed, 1, i) for i in range(len(p["claim37"]))]
             + [derive_seed(cfg.seed, 2, i) for i in range(len(p["budget"]))])
    cols = ["claim", "estimate", "stderr", "trials", "bound", "relation", "exact", "verdict", "detail"]
    records = [TrialRecord(cfg.experiment, i, s, r.as_row()) for i, (s, r) in enumerate(zip(seeds, reports))]
    return ExperimentResult(cfg, cols, records, {f"{r.claim}[{r.detail}]": r.verdict for r in reports})


def run_bounds(cfg: ExperimentConfig) -> ExperimentResult:
    """Evaluate the sample-size formulas and the unshatterable-size search."""
    p = cfg.params
    n, d, power = p["N"], p["d"], p["p"]
    rows = []
    for v in bd.VARIANTS:
        pb = bd.pac_sample_bounds(n, d, v, p["eps"])
        rows.append((f"pac_lower[{v}]", pb.lower))
        rows.append((f"pac_upper[{v}]", pb.upper))
        if v != "arbitrary":
            rows.append((f"min_unshatterable[{v}]", bd.min_unshatterable_size(n, d, power, v)))
    up = bd.nasty_upper_bound(p["gap"], p["delta"], p["vc"], p["c"])
    lo = bd.nasty_lower_bound(p["eta"], p["gap"], p["vc"])
    rows += [("nasty_upper_n", up.n), ("nasty_hoeffding_floor", up.hoeffding_floor),
             ("nasty_lower_eta_term", lo[0]), ("nasty_lower_vc_term", lo[1]),
             ("alpha_sample_size", bd.alpha_sample_size(p["gap"], p["delta"], p["vc"], p["c"]))]
    records = [TrialRecord(cfg.experiment, i, cfg.seed, {"quantity": q, "value": v}) for i, (q, v) in enumerate(rows)]
    return ExperimentResult(cfg, ["quantity", "value"], records, {"evaluated": True})


def run_rademacher(cfg: ExperimentConfig) -> ExperimentResult:
    """Rademacher estimate and bound for a batch, plus the Lipschitz and validity checks."""
    p = cfg.params
    rng_seed = derive_seed(cfg.seed, 0)
    if p["batch"]:
        batch = loads_batch(Path(p["batch"]).read_text())
    else:
        batch = synthetic_batch(p["n"], p["k"], p["D"], rng_seed)
    cls = LinearEmbeddingClass(batch.dim, p["d"], p["R"])
    loss = hinge_loss_spec(p["margin"], batch.k)
    est = rademacher_estimate(batch, cls, p["draws"], derive_seed(cfg.seed, 1))
    w = cls.random_weights(derive_seed(cfg.seed, 2))
    risk = empirical_risk(batch, w, loss)
    bound = generalization_bound(risk, est.value, loss.lipschitz, batch.n, p["delta"])
    rows = [("rademacher", est.value, est.stderr, "", ""), ("empirical_risk", risk, "", "", ""),
            ("generalization_bound", bound, "", "", "")]
    verdicts = {}
    if p["lipschitz_trials"]:
        ld = lipschitz_check_distance(p["lipschitz_trials"], seed=derive_seed(cfg.seed, 3))
        lb = lipschitz_check_binary(p["lipschitz_trials"], seed=derive_seed(cfg.seed, 4))
        rows += [("lipschitz_distance_max_ratio", ld.max_ratio, "", ld.claimed, ld.verdict),
                 ("lipschitz_binary_max_ratio", lb.max_ratio, "", lb.claimed, lb.verdict)]
        verdicts["lipschitz_distance"] = ld.verdict
        verdicts["lipschitz_binary"] = lb.verdict
    if p["splits"]:
        bv = bound_validity_trials(p["splits"], p["n"], p["k"], p["D"], p["d"], p["R"], p["delta"],
                                   seed=derive_seed(cfg.seed, 5))
        rows += [("bound_violation_rate", bv.rate, "", bv.delta, bv.verdict),
                 ("mean_bound", bv.mean_bound, "", "", ""), ("mean_test_risk", bv.mean_test_risk, "", "", "")]
        verdicts["bound_validity"] = bv.verdict
    cols = ["quantity", "value", "stderr", "claimed", "verdict"]
    records = [TrialRecord(cfg.experiment, i, cfg.seed, dict(zip(cols, r))) for i, r in enumerate(rows)]
    return ExperimentResult(cfg, cols, records, verdicts)


@dataclass(frozen=True)
class Experiment:
    runner: Callable
    claim: str
    params: dict


EXPERIMENTS: dict[str, Experiment] = {
    "vcdim": Experiment(run_vcdim, "VC dimension C(N,2)-1 of arbitrary distances", {
        "N": (int, 4), "budget": (int, 2 ** 22)}),
    "realizable": Experiment(run_realizable, "realizable iff the pair-order digraph is acyclic", {
        "N": (int, 5), "queries": (int, 8), "trials": (int, 200), "labeled": (str, "")}),
    "construct": Experiment(run_construct, "shattering constructions (metric and l_p)", {
        "family": (str, "consecutive"), "N": (int, 6), "d": (int, 3), "p": (float, 2.0),
        "trials": (int, 1000)}),
    "adversary-sim": Experiment(run_indistinguishability, "indistinguishable targets at eps < 2 eta", {
        "eta": (float, 0.1), "n": (int, 10 ** 6)}),
    "erm-curve": Experiment(run_erm_curve, "ERM upper bound O((VC + log 1/delta) / gap^2)", {
        "eta": (float, 0.05), "gap": (float, 0.2), "delta": (float, 0.05), "d": (int, 8),
        "trials": (int, 200), "c": (float, 0.0), "calib_trials": (int, 200),
        "c_grid": ("floats", tuple(2.0 ** k for k in range(-6, 4))), "n_grid": ("ints", (1, 4, 16, 64))}),
    "bayes-lb": Experiment(run_bayes_lower_bound, "eta / gap^2 lower bound (majority vote)", {
        "eta": (float, 0.12), "gap": (float, 0.009), "delta": (float, 0.002), "n": (int, 0),
        "trials": (int, 10 ** 5), "scale": (float, 10.0)}),
    "vc-lb": Experiment(run_vc_lower_bound, "VC / gap lower bound (power-set ERM)", {
        "d": (int, 12), "eta": (float, 0.05), "gap": (float, 0.01), "delta": (float, 0.05),
        "n": (int, 0), "trials": (int, 10 ** 4), "scale": (float, 10.0)}),
    "verify": Experiment(run_verify, "binomial tail claims and budget concentration", {
        "trials": (int, 10 ** 5),
        "claim35": ("tuples", ((1000, 0.5), (500, 0.3), (200, 0.5), (1000, 0.1), (2000, 0.05))),
        "claim37": ("tuples", ((100, 0.5, 0.25), (50, 0.3, 0.1), (200, 0.7, 0.5), (80, 0.9, 0.6),
                               (1000, 0.2, 0.15))),
        "budget": ("tuples", ((2000, 0.1, 0.2), (500, 0.05, 0.3), (1000, 0.2, 0.1)))}),
    "bounds": Experiment(run_bounds, "sample-size formulas and Milnor-based unshatterable sizes", {
        "N": (int, 4), "d": (int, 2), "p": (float, 2.0), "eps": (float, 0.1), "eta": (float, 0.1),
        "gap": (float, 0.05), "delta": (float, 0.05), "vc": (int, 10), "c": (float, 1.0)}),
    "rademacher": Experiment(run_rademacher, "Rademacher bound for contrastive losses", {
        "batch": (str, ""), "n": (int, 100), "k": (int, 2), "D": (int, 6), "d": (int, 3), "R": (float, 1.0),
        "margin": (float, 0.5), "draws": (int, 1000), "delta": (float, 0.05),
        "lipschitz_trials": (int, 10 ** 5), "splits": (int, 200)}),
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    t0 = time.perf_counter()
    res = EXPERIMENTS[cfg.experiment].runner(cfg)
    res.wall_time = time.perf_counter() - t0
    return res


# Leading columns of every CSV are ``experiment, trial, seed``.
CSV_COLUMNS = {
    "vcdim": "N, vcdim, expected, oracle_calls, queries",
    "realizable": "N, num_queries, realizable, cycle_length, certificate_ok",
    "construct": "consecutive: N, labels_ok, is_metric, min_distance, max_distance, ok; "
                 "embedding: N, d, p, labels_ok, max_gap_error, ok",
    "adversary-sim": "outcome, seed_h2, freq_h1, freq_h2, expected, difference, se_difference, within_4se",
    "erm-curve": "phase, c, n, budget, disagreements, clean_disagreements, true_error, success, doubling_ok",
    "bayes-lb": "phase, n, target, chosen, true_error, failure",
    "vc-lb": "phase, n, disagreements, true_error, failure",
    "verify": "claim, estimate, stderr, trials, bound, relation, exact, verdict, detail",
    "bounds": "quantity, value",
    "rademacher": "quantity, value, stderr, claimed, verdict",
}
