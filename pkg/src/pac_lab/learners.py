"""Learners: exhaustive ERM, the two-point majority vote, and an l_p embedding probe."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .adversaries import QueryDistribution, SampleSet
from .core import Embedding, LabeledSample, queries_to_array
from .errors import DomainError, OptimizerError
from .seeding import make_rng

DEFAULT_MARGIN = 1e-3


@dataclass(frozen=True, eq=False)
class FiniteHypothesisClass:
    """Explicit table: row ``h`` is the +-1 label vector of hypothesis ``h``."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int8)
        if t.ndim != 2 or t.shape[0] == 0:
            raise DomainError("class table must be a nonempty 2-D array")
        if not np.isin(t, (-1, 1)).all():
            raise DomainError("class table entries must be -1 or +1")
        if len(np.unique(t, axis=0)) != len(t):
            raise DomainError("class table has duplicate rows")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def size(self) -> int:
        return self.table.shape[0]

    @property
    def universe(self) -> int:
        return self.table.shape[1]


def power_set_class(d: int) -> FiniteHypothesisClass:
    """All ``2^d`` labelings; bit ``t`` of the row index gives query ``t`` (0 -> -1)."""
    if not 1 <= d <= 20:
        raise DomainError(f"power-set class supports 1 <= d <= 20, got {d}")
    bits = (np.arange(2 ** d)[:, None] >> np.arange(d)) & 1
    return FiniteHypothesisClass((2 * bits - 1).astype(np.int8))


@dataclass(frozen=True)
class LearnerOutput:
    hypothesis: object
    disagreements: int
    true_error: float | None = None


def disagreement_counts(cls: FiniteHypothesisClass, sample: SampleSet) -> np.ndarray:
    """Empirical disagreements of every hypothesis with the observed labels."""
    qid, _ = sample.observed()
    if qid.size and qid.max() >= cls.universe:
        raise DomainError("sample references queries outside the class universe")
    neg, pos = sample.label_counts(cls.universe)
    t = cls.table
    return (t > 0).astype(np.int64) @ neg + (t < 0).astype(np.int64) @ pos


def erm(cls: FiniteHypothesisClass, sample: SampleSet, dist: QueryDistribution | None = None,
        target=None) -> LearnerOutput:
    """Exhaustive empirical risk minimization; ties go to the lowest index.

    When ``dist`` and ``target`` are given the exact true error is attached.
    """
    if len(sample) == 0:
        warnings.warn("empty sample; returning hypothesis 0", UserWarning, stacklevel=2)
    counts = disagreement_counts(cls, sample)
    best = int(np.argmin(counts))
    err = None if dist is None else dist.error(cls.table[best], target)
    return LearnerOutput(best, int(counts[best]), err)


def bayes_majority(sample: SampleSet) -> int:
    """Pick ``h1`` (returns 1) when ``s2``'s -1 labels are at least as many as its +1 labels.

    Ties, including zero ``s2`` occurrences, go to ``h1``.
    """
    qid, lab = sample.observed()
    on_s2 = lab[qid == 1]
    return 1 if np.count_nonzero(on_s2 < 0) >= np.count_nonzero(on_s2 > 0) else 2


# -- l_p embedding probe -------------------------------------------------------

def _unpack(samples):
    if isinstance(samples, tuple) and len(samples) == 2:
        q, lab = samples
        return queries_to_array(q), np.asarray(lab, dtype=float)
    pairs = [(s.query, s.label) if isinstance(s, LabeledSample) else s for s in samples]
    q = queries_to_array([qq for qq, _ in pairs])
    lab = np.array([int(l) for _, l in pairs], dtype=float)
    return q, lab


def _lp_and_grad(diff: np.ndarray, p: float):
    """Row-wise l_p norm of ``diff`` and its gradient (0 where the norm is 0)."""
    a = np.abs(diff)
    norm = (a ** p).sum(axis=1) ** (1.0 / p)
    safe = np.where(norm > 0, norm, 1.0)
    grad = np.sign(diff) * a ** (p - 1) / safe[:, None] ** (p - 1)
    grad[norm == 0] = 0.0
    return norm, grad


def hinge_loss(coords: np.ndarray, queries: np.ndarray, labels: np.ndarray, p: float,
               margin: float = DEFAULT_MARGIN):
    """``sum_q max(0, margin - label_q * (rho(a, first) - rho(a, second)))`` and its subgradient.

    A loss of zero means every label holds with slack at least ``margin``.
    """
    a, f, s = queries[:, 0], queries[:, 1], queries[:, 2]
    d1, g1 = _lp_and_grad(coords[a] - coords[f], p)
    d2, g2 = _lp_and_grad(coords[a] - coords[s], p)
    slack = margin - labels * (d1 - d2)
    active = slack > 0
    loss = float(slack[active].sum())
    w = -labels[active][:, None]
    grad = np.zeros_like(coords)
    np.add.at(grad, a[active], w * (g1[active] - g2[active]))
    np.add.at(grad, f[active], -w * g1[active])
    np.add.at(grad, s[active], w * g2[active])
    return loss, grad


@dataclass
class TrainResult:
    embedding: Embedding
    loss: float
    history: list = field(default_factory=list)
    restart: int = 0


def train_embedding(samples, n: int, d: int, p: float = 2.0, *, steps: int = 2000,
                    lr: float = 0.05, margin: float = DEFAULT_MARGIN, seed=0,
                    restarts: int = 1, init=None) -> TrainResult:
    """Fit an l_p embedding to labeled triplets by subgradient descent.

    Starts from i.i.d. uniform ``[-1, 1]`` coordinates (or ``init``); each
    restart draws a fresh start from the same seeded stream.  Stops early
    when the loss hits zero.  Returns the restart with the smallest loss.
    """
    if p < 1:
        raise DomainError(f"subgradient descent needs p >= 1, got {p}")
    q, lab = _unpack(samples)
    if q.size and q.max() >= n:
        raise DomainError("query references a point outside the embedding")
    rng = make_rng(seed)
    best = None
    for r in range(restarts):
        x = np.array(init, dtype=float) if init is not None and r == 0 else rng.uniform(-1, 1, (n, d))
        history = []
        loss = np.inf
        for _ in range(steps):
            loss, grad = hinge_loss(x, q, lab, p, margin)
            history.append(loss)
            if not np.isfinite(loss):
                raise OptimizerError(f"loss became {loss} on restart {r}", history)
            if loss == 0.0:
                break
            x -= lr * grad
        else:
            loss, _ = hinge_loss(x, q, lab, p, margin)
            history.append(loss)
        if not np.all(np.isfinite(x)):
            raise OptimizerError(f"non-finite coordinates on restart {r}", history)
        res = TrainResult(Embedding(x, p), loss, history, r)
        if best is None or res.loss < best.loss:
            best = res
        if best.loss == 0.0:
            break
    return best


def recount(cls: FiniteHypothesisClass, index: int, sample: SampleSet) -> int:
    """Independent recount of one hypothesis' disagreements."""
    row = cls.table[index]
    qid, lab = sample.observed()
    return int(np.count_nonzero(row[qid] != lab))


def with_true_error(out: LearnerOutput, cls: FiniteHypothesisClass, dist: QueryDistribution, target) -> LearnerOutput:
    return replace(out, true_error=dist.error(cls.table[out.hypothesis], target))
