"""Nasty-noise sample generation.

The adversary draws ``n`` samples from a known distribution, labels them by
the target, and then modifies ``m ~ Bin(n, eta)`` of them.  The concrete
strategies here act on abstract queries: query id ``q`` stands for the
synthetic triplet ``(3q, 3q+1, 3q+2)`` because only the combinatorial
structure matters to the lower-bound arguments.

Samples carry a ``corrupted`` column for the harness.  Learners receive
only ``query_id`` and ``label`` (see :meth:`SampleSet.observed`), and the
hidden target is returned separately to the caller that evaluates errors.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, PreconditionError
from .seeding import make_rng

STRATEGIES = ("indistinguishable", "gap", "vc", "random-flip", "majority-flip")


@dataclass(frozen=True)
class AdversaryConfig:
    """Parameters of one adversary run.  Checked against the strategy's preconditions."""

    strategy: str
    eta: float
    n: int
    seed: int = 0
    gap: float | None = None
    d: int | None = None
    target: int = 1

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise DomainError(f"unknown strategy {self.strategy!r}")
        if self.n < 0:
            raise DomainError("sample size must be nonnegative")
        if not 0 <= self.eta < 1:
            raise DomainError(f"noise rate must lie in [0, 1), got {self.eta}")
        if self.strategy == "indistinguishable":
            _check_indistinguishable(self.eta)
        elif self.strategy == "gap":
            _check_gap(self.eta, self.gap)
        elif self.strategy == "vc":
            _check_vc(self.d, self.eta, self.gap)

    def run(self):
        rng = make_rng(self.seed)
        if self.strategy == "indistinguishable":
            return indistinguishable_adversary(self.eta, self.n, self.target, rng)
        if self.strategy == "gap":
            return gap_adversary(self.eta, self.gap, self.n, self.target, rng)
        if self.strategy == "vc":
            return vc_adversary(self.d, self.eta, self.gap, self.n, rng)
        raise DomainError(f"strategy {self.strategy!r} needs a clean sample; call it directly")


# -- sample sets ---------------------------------------------------------------

def synthetic_triplets(query_id) -> np.ndarray:
    q = np.asarray(query_id, dtype=np.int64)
    return np.stack([3 * q, 3 * q + 1, 3 * q + 2], axis=-1)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``n`` labeled draws of abstract queries."""

    query_id: np.ndarray
    label: np.ndarray
    corrupted: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.query_id, dtype=np.int64)
        lab = np.asarray(self.label, dtype=np.int8)
        c = np.asarray(self.corrupted, dtype=bool)
        if not q.shape == lab.shape == c.shape or q.ndim != 1:
            raise DomainError("query_id, label and corrupted must be equal-length vectors")
        if lab.size and not np.isin(lab, (-1, 1)).all():
            raise DomainError("labels must be -1 or +1")
        for name, arr in (("query_id", q), ("label", lab), ("corrupted", c)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.query_id.size

    @property
    def num_corrupted(self) -> int:
        return int(self.corrupted.sum())

    def observed(self) -> tuple[np.ndarray, np.ndarray]:
        """What a learner may see: query ids and labels."""
        return self.query_id, self.label

    def label_counts(self, num_queries: int) -> tuple[np.ndarray, np.ndarray]:
        """Per query: number of -1 labels and number of +1 labels."""
        neg = np.bincount(self.query_id[self.label < 0], minlength=num_queries)
        pos = np.bincount(self.query_id[self.label > 0], minlength=num_queries)
        return neg, pos

    def modified(self, positions, labels=None, query_ids=None) -> "SampleSet":
        """Replace the samples at ``positions``; they are marked corrupted."""
        positions = np.asarray(positions, dtype=np.int64)
        q, lab, c = self.query_id.copy(), self.label.copy(), self.corrupted.copy()
        if query_ids is not None:
            q[positions] = query_ids
        lab[positions] = -lab[positions] if labels is None else labels
        c[positions] = True
        return SampleSet(q, lab, c)

    def to_csv(self, dest=None, harness: bool = False) -> str:
        """CSV with columns ``query_id, anchor, first, second, label`` (+ ``corrupted``)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["query_id", "anchor", "first", "second", "label"]
        w.writerow(cols + ["corrupted"] if harness else cols)
        trip = synthetic_triplets(self.query_id)
        for i in range(len(self)):
            row = [int(self.query_id[i]), *map(int, trip[i]), int(self.label[i])]
            if harness:
                row.append(int(self.corrupted[i]))
            w.writerow(row)
        text = buf.getvalue()
        if dest is not None:
            Path(dest).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "SampleSet":
        """Read from a path, or from CSV text (anything containing a newline)."""
        text = str(source) if "\n" in str(source) else Path(source).read_text()
        rows = list(csv.DictReader(io.StringIO(text)))
        q = [int(r["query_id"]) for r in rows]
        lab = [int(r["label"]) for r in rows]
        c = [bool(int(r.get("corrupted") or 0)) for r in rows]
        return cls(np.array(q, dtype=np.int64), np.array(lab, dtype=np.int8), np.array(c, dtype=bool))


# -- distributions -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QueryDistribution:
    """A finite distribution over abstract query ids ``0 .. K-1``."""

    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 1 or m.size == 0 or (m < 0).any() or abs(m.sum() - 1) > 1e-12:
            raise DomainError(f"masses must be a nonnegative vector summing to 1, got {m}")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @property
    def size(self) -> int:
        return self.masses.size

    def draw(self, n: int, rng) -> np.ndarray:
        rng = make_rng(rng)
        return rng.choice(self.size, size=n, p=self.masses)

    def error(self, hypothesis, target) -> float:
        """Exact disagreement probability between two label vectors."""
        h, t = np.asarray(hypothesis), np.asarray(target)
        return float(self.masses[h != t].sum())


@dataclass(frozen=True, eq=False)
class TwoPointDistribution(QueryDistribution):
    """Query 0 (``s1``) on which ``h1 = h2``; query 1 (``s2``) on which they disagree."""

    target: int = 1

    h1 = np.array([-1, -1], dtype=np.int8)
    h2 = np.array([-1, 1], dtype=np.int8)

    def __post_init__(self):
        super().__post_init__()
        if self.size != 2 or self.target not in (1, 2):
            raise DomainError("two-point distribution needs 2 masses and target 1 or 2")

    @property
    def target_labels(self) -> np.ndarray:
        return self.h1 if self.target == 1 else self.h2


def vc_distribution_masses(d: int, eta: float, gap: float) -> np.ndarray:
    """``(1 - 2eta - 8gap, 8gap/(d-2) x (d-2), 2eta)``."""
    _check_vc(d, eta, gap)
    masses = np.empty(d)
    masses[0] = 1 - 2 * eta - 8 * gap
    masses[1:-1] = 8 * gap / (d - 2)
    masses[-1] = 2 * eta
    return masses


class VCAdversaryDistribution(QueryDistribution):
    """Distribution over ``d`` shattered queries used by the VC lower bound."""

    def __init__(self, d: int, eta: float, gap: float):
        super().__init__(vc_distribution_masses(d, eta, gap))


def _check_indistinguishable(eta):
    if not 0 <= eta < 0.5:
        raise DomainError(f"indistinguishability needs 0 <= eta < 1/2, got {eta}")


def _check_gap(eta, gap):
    if gap is None or not gap > 0:
        raise DomainError(f"gap must be positive, got {gap}")
    if not 0 <= eta or 2 * eta + gap > 1:
        raise DomainError(f"need 2*eta + gap <= 1, got eta={eta}, gap={gap}")


def _check_vc(d, eta, gap):
    if d is None or d < 3:
        raise PreconditionError(f"VC construction needs d >= 3, got {d}")
    if gap is None or not gap > 0 or eta < 0:
        raise PreconditionError(f"need gap > 0 and eta >= 0, got gap={gap}, eta={eta}")
    if 2 * eta + 8 * gap > 1:
        raise PreconditionError(f"need 2*eta + 8*gap <= 1, got {2 * eta + 8 * gap}")


# -- strategies ----------------------------------------------------------------

def sample_budget(n: int, eta: float, rng) -> int:
    """Number of samples the adversary may modify: ``m ~ Bin(n, eta)``."""
    if not 0 <= eta <= 1:
        raise DomainError(f"noise rate must lie in [0, 1], got {eta}")
    return int(make_rng(rng).binomial(n, eta))


def _flip_query(dist: TwoPointDistribution, n, flip_prob, rng) -> SampleSet:
    rng = make_rng(rng)
    qid = dist.draw(n, rng)
    labels = dist.target_labels[qid].copy()
    flips = (qid == 1) & (rng.random(n) < flip_prob)
    labels[flips] *= -1
    return SampleSet(qid, labels, flips)


def indistinguishable_adversary(eta: float, n: int, target: int, rng) -> SampleSet:
    """Two-point distribution ``(1-2eta, 2eta)``; each ``s2`` flipped with prob 1/2.

    The observed outcomes ``(s1,-1), (s2,-1), (s2,+1)`` occur with
    probabilities ``(1-2eta, eta, eta)`` whichever classifier is the target.
    """
    _check_indistinguishable(eta)
    dist = TwoPointDistribution(np.array([1 - 2 * eta, 2 * eta]), target)
    return _flip_query(dist, n, 0.5, rng)


def gap_adversary(eta: float, gap: float, n: int, target: int, rng) -> SampleSet:
    """Two-point distribution ``(1-eps, eps)`` with ``eps = 2eta + gap``.

    Each ``s2`` is flipped with probability ``eta / eps``, so correct and
    flipped ``s2`` labels occur with probabilities ``eta + gap`` and ``eta``.
    """
    _check_gap(eta, gap)
    eps = 2 * eta + gap
    dist = TwoPointDistribution(np.array([1 - eps, eps]), target)
    return _flip_query(dist, n, eta / eps, rng)


def vc_adversary(d: int, eta: float, gap: float, n: int, rng):
    """Uniformly random target over all ``2^d`` labelings; last query flipped w.p. 1/2.

    Returns ``(samples, target)``; ``target`` is for the evaluating harness only.
    """
    dist = VCAdversaryDistribution(d, eta, gap)
    rng = make_rng(rng)
    target = rng.choice(np.array([-1, 1], dtype=np.int8), size=d)
    qid = dist.draw(n, rng)
    labels = target[qid].copy()
    flips = (qid == d - 1) & (rng.random(n) < 0.5)
    labels[flips] *= -1
    return SampleSet(qid, labels, flips), target


def clean_sample(dist: QueryDistribution, target, n: int, rng) -> SampleSet:
    """``n`` draws labeled by ``target`` with no corruption."""
    qid = dist.draw(n, rng)
    labels = np.asarray(target, dtype=np.int8)[qid]
    return SampleSet(qid, labels, np.zeros(n, dtype=bool))


def random_flip_adversary(clean: SampleSet, eta: float, rng) -> SampleSet:
    """Flip ``m ~ Bin(n, eta)`` uniformly chosen samples."""
    rng = make_rng(rng)
    m = sample_budget(len(clean), eta, rng)
    return clean.modified(rng.choice(len(clean), size=m, replace=False))


def majority_flip_adversary(clean: SampleSet, masses, eta: float, rng) -> SampleSet:
    """Spend ``m ~ Bin(n, eta)`` flips overturning majorities on heavy queries.

    Queries are visited by decreasing mass; a query is overturned when
    ``floor(c/2) + 1`` of its ``c`` occurrences fit in the remaining budget.
    Leftover budget flips uniformly chosen untouched samples.
    """
    rng = make_rng(rng)
    n = len(clean)
    m = sample_budget(n, eta, rng)
    masses = np.asarray(masses, dtype=float)
    counts = np.bincount(clean.query_id, minlength=masses.size)
    chosen: list[np.ndarray] = []
    budget = m
    for q in np.argsort(-masses, kind="stable"):
        need = counts[q] // 2 + 1
        if counts[q] and need <= budget:
            chosen.append(np.flatnonzero(clean.query_id == q)[:need])
            budget -= need
    picked = np.concatenate(chosen) if chosen else np.empty(0, dtype=np.int64)
    if budget:
        rest = np.setdiff1d(np.arange(n), picked)
        picked = np.concatenate([picked, rng.choice(rest, size=min(budget, rest.size), replace=False)])
    return clean.modified(picked)
