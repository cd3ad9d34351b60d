"""Data-dependent bounds for contrastive losses with k negatives.

The hypothesis class is linear: ``f(x) = W x`` with ``||W||_F <= R`` and
inputs of Euclidean norm at most 1, so ``||f(x)||_2 <= R``.  The supremum
inside the Rademacher average is linear in ``W`` and is therefore exact:
``sup_W <W, G> = R ||G||_F``.  Monte Carlo error comes only from averaging
over the sign draws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .seeding import make_rng


@dataclass(frozen=True, eq=False)
class ContrastiveBatch:
    """``n`` tuples: an anchor plus ``k + 1`` comparison points, all in ``R^D``."""

    anchors: np.ndarray       # (n, D)
    comparisons: np.ndarray   # (n, k + 1, D)

    def __post_init__(self):
        a = np.asarray(self.anchors, dtype=float)
        c = np.asarray(self.comparisons, dtype=float)
        if a.ndim != 2 or c.ndim != 3 or c.shape[0] != a.shape[0] or c.shape[2] != a.shape[1]:
            raise DomainError(f"inconsistent batch shapes {a.shape} and {c.shape}")
        object.__setattr__(self, "anchors", a)
        object.__setattr__(self, "comparisons", c)

    @property
    def n(self) -> int:
        return self.anchors.shape[0]

    @property
    def k(self) -> int:
        return self.comparisons.shape[1] - 1

    @property
    def dim(self) -> int:
        return self.anchors.shape[1]

    def permuted(self, order) -> "ContrastiveBatch":
        return ContrastiveBatch(self.anchors[order], self.comparisons[order])

    def max_input_norm(self) -> float:
        return float(max(np.linalg.norm(self.anchors, axis=-1).max(initial=0.0),
                         np.linalg.norm(self.comparisons, axis=-1).max(initial=0.0)))


@dataclass(frozen=True)
class LinearEmbeddingClass:
    """``{x -> W x : W in R^(d x D), ||W||_F <= R}`` on inputs of norm <= 1."""

    input_dim: int
    output_dim: int
    cap: float = 1.0

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1 or not self.cap > 0:
            raise DomainError("need positive dimensions and cap")

    def check(self, weights: np.ndarray) -> np.ndarray:
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.output_dim, self.input_dim):
            raise DomainError(f"weights must have shape {(self.output_dim, self.input_dim)}")
        if np.linalg.norm(w) > self.cap * (1 + 1e-12):
            raise DomainError(f"||W||_F = {np.linalg.norm(w)} exceeds cap {self.cap}")
        return w

    def check_batch(self, batch: ContrastiveBatch) -> None:
        if batch.dim != self.input_dim:
            raise DomainError(f"batch dimension {batch.dim} != class input {self.input_dim}")
        if batch.max_input_norm() > 1 + 1e-12:
            raise DomainError("inputs must have Euclidean norm <= 1")

    def random_weights(self, rng) -> np.ndarray:
        """Uniform direction on the Frobenius sphere of radius ``cap``."""
        w = make_rng(rng).standard_normal((self.output_dim, self.input_dim))
        return self.cap * w / np.linalg.norm(w)


@dataclass(frozen=True)
class LossSpec:
    """A loss on the ``k + 1`` distances, clamped to ``[0, 1]``.

    ``lipschitz`` is the constant with respect to the Euclidean norm on the
    distance vector, after clamping (clamping does not increase it).
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    arity: int | None = None

    def __call__(self, distances: np.ndarray) -> np.ndarray:
        return np.clip(self.fn(distances), 0.0, 1.0)


def hinge_loss_spec(margin: float = 0.5, k: int | None = None) -> LossSpec:
    """``clip(margin + rho_0 - min_{i>=1} rho_i, 0, 1)``; Lipschitz ``sqrt(2)`` (1 when k = 0)."""
    def fn(r):
        if r.shape[-1] == 1:
            return margin + r[..., 0]
        return margin + r[..., 0] - r[..., 1:].min(axis=-1)
    return LossSpec(f"hinge({margin})", fn, 1.0 if k == 0 else math.sqrt(2), None if k is None else k + 1)


def mean_gap_loss_spec(k: int) -> LossSpec:
    """``clip(1/2 + (rho_0 - mean_{i>=1} rho_i) / 2, 0, 1)``; Lipschitz ``sqrt(1 + 1/k) / 2``."""
    if k < 1:
        raise DomainError("mean-gap loss needs k >= 1")
    return LossSpec("mean-gap", lambda r: 0.5 + (r[..., 0] - r[..., 1:].mean(axis=-1)) / 2,
                    0.5 * math.sqrt(1 + 1 / k), k + 1)


def constant_loss_spec(value: float) -> LossSpec:
    return LossSpec(f"constant({value})", lambda r: np.full(r.shape[:-1], float(value)), 0.0)


def tuple_distances(batch: ContrastiveBatch, weights: np.ndarray) -> np.ndarray:
    """``rho(f(x_j), f(x_ji))`` as an ``(n, k + 1)`` array."""
    fa = batch.anchors @ weights.T
    fc = batch.comparisons @ weights.T
    return np.linalg.norm(fa[:, None, :] - fc, axis=-1)


def empirical_risk(batch: ContrastiveBatch, weights: np.ndarray, loss: LossSpec) -> float:
    """Mean clamped loss over the tuples."""
    if loss.arity is not None and loss.arity != batch.k + 1:
        raise DomainError(f"loss expects {loss.arity} distances, batch has {batch.k + 1}")
    return float(loss(tuple_distances(batch, np.asarray(weights, dtype=float))).mean())


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    draws: int


def _rademacher_sups(batch, cls, num_draws, rng, chunk=256) -> np.ndarray:
    n, k1, d = batch.n, batch.k + 1, cls.output_dim
    sups = []
    left = num_draws
    while left:
        b = min(chunk, left)
        s1 = rng.integers(0, 2, (b, n, k1, d), dtype=np.int8) * 2 - 1
        s2 = rng.integers(0, 2, (b, n, k1, d), dtype=np.int8) * 2 - 1
        # G[t] = sum_{j,i} s1[j,i,t] x_j + s2[j,i,t] x_ji
        g = np.einsum("bjit,jD->btD", s1, batch.anchors) + np.einsum("bjit,jiD->btD", s2, batch.comparisons)
        sups.append(cls.cap * np.sqrt((g ** 2).sum(axis=(1, 2))))
        left -= b
    return np.concatenate(sups)


def rademacher_estimate(batch: ContrastiveBatch, cls: LinearEmbeddingClass, num_draws: int = 1000,
                        seed=0) -> Estimate:
    """Monte Carlo value of the (un-normalized) Rademacher average of the embedding class.

    ``E_sigma sup_f sum_j sum_i sum_t (sigma_jit1 f_t(x_j) + sigma_jit2 f_t(x_ji))``
    with ``2 n (k + 1) d`` independent signs per draw.
    """
    cls.check_batch(batch)
    if num_draws < 2:
        raise DomainError("need at least 2 sign draws for a standard error")
    sups = _rademacher_sups(batch, cls, num_draws, make_rng(seed))
    return Estimate(float(sups.mean()), float(sups.std(ddof=1) / math.sqrt(num_draws)), num_draws)


def generalization_bound(emp_risk: float, rademacher: float, lipschitz: float, n: int, delta: float) -> float:
    """``emp_risk + 4 L R_S / n + 3 sqrt(ln(4/delta) / (2n))``."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if n < 1:
        raise DomainError("n must be positive")
    return emp_risk + 4 * lipschitz * rademacher / n + 3 * math.sqrt(math.log(4 / delta) / (2 * n))


# -- Lipschitz checks ----------------------------------------------------------

@dataclass(frozen=True)
class LipschitzReport:
    """Largest observed ``|g(t1) - g(t2)| / ||t1 - t2||`` over random probes.

    ``claimed`` is the constant being checked and ``sharp`` is the best
    possible constant, attained by the extremal pairs constructed below.
    """

    trials: int
    max_ratio: float
    claimed: float
    sharp: float

    @property
    def verdict(self) -> bool:
        return self.max_ratio <= self.claimed + 1e-12


def pair_distance(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.linalg.norm(u - v, axis=-1)


def triplet_gap(u, v, w) -> np.ndarray:
    """Unsigned triplet score ``||u - v|| - ||u - w||``."""
    return np.linalg.norm(u - v, axis=-1) - np.linalg.norm(u - w, axis=-1)


def _ratios(delta_out, delta_in) -> np.ndarray:
    den = np.sqrt((delta_in ** 2).sum(axis=-1))
    return np.abs(delta_out) / np.where(den > 0, den, np.inf)


def lipschitz_check_distance(trials: int = 10 ** 5, d: int = 8, seed=0) -> LipschitzReport:
    """Probe ``rho(u, v) = ||u - v||`` on independent Gaussian pairs in ``R^(2d)``."""
    u1, v1, u2, v2 = make_rng(seed).standard_normal((4, trials, d))
    r = _ratios(pair_distance(u1, v1) - pair_distance(u2, v2), np.concatenate([u1 - u2, v1 - v2], -1))
    return LipschitzReport(trials, float(r.max()), 1.0, math.sqrt(2))


def lipschitz_check_binary(trials: int = 10 ** 5, d: int = 8, seed=0) -> LipschitzReport:
    """Probe the unsigned triplet score on independent Gaussian triples in ``R^(3d)``."""
    u1, v1, w1, u2, v2, w2 = make_rng(seed).standard_normal((6, trials, d))
    r = _ratios(triplet_gap(u1, v1, w1) - triplet_gap(u2, v2, w2),
                np.concatenate([u1 - u2, v1 - v2, w1 - w2], -1))
    return LipschitzReport(trials, float(r.max()), 2.0, math.sqrt(6))


def distance_extremal_ratio(d: int = 8, step: float = 1e-3) -> float:
    """Ratio for ``u`` and ``v`` moved in opposite directions along ``u - v``: ``sqrt(2)``."""
    e = np.zeros(d)
    e[0] = 1.0
    u1, v1 = np.zeros(d), -e
    u2, v2 = u1 + step * e, v1 - step * e
    return float(_ratios(pair_distance(u1, v1) - pair_distance(u2, v2),
                         np.concatenate([u1 - u2, v1 - v2])))


def binary_extremal_ratio(d: int = 8, step: float = 1e-3, anchor_only: bool = False) -> float:
    """Ratio along the gradient of the triplet score with ``v`` and ``w`` on opposite sides.

    Moving all three points gives ``sqrt(6)``; moving only the anchor gives 2.
    """
    e = np.zeros(d)
    e[0] = 1.0
    u1, v1, w1 = np.zeros(d), -e, e
    du, dv, dw = 2 * e, -e, -e
    if anchor_only:
        dv = dw = np.zeros(d)
    u2, v2, w2 = u1 + step * du, v1 + step * dv, w1 + step * dw
    return float(_ratios(triplet_gap(u1, v1, w1) - triplet_gap(u2, v2, w2),
                         np.concatenate([u1 - u2, v1 - v2, w1 - w2])))


# -- vector contraction --------------------------------------------------------

@dataclass(frozen=True)
class VectorLoss:
    """``h: R^d -> R`` with Lipschitz constant ``lipschitz``.

    ``coef`` is set when ``h(v) = coef . v`` is linear, which makes the
    supremum exact; otherwise ``grad`` drives a projected ascent and the
    supremum is a lower estimate.
    """

    name: str
    fn: Callable
    grad: Callable
    lipschitz: float
    coef: np.ndarray | None = None


def identity_vector_loss(d: int = 1, scale: float = 1.0) -> VectorLoss:
    coef = np.zeros(d)
    coef[0] = scale
    return VectorLoss("identity", lambda v: v @ coef, lambda v: np.broadcast_to(coef, v.shape),
                      abs(scale), coef)


def norm_vector_loss(scale: float = 1.0) -> VectorLoss:
    def grad(v):
        nrm = np.linalg.norm(v, axis=-1, keepdims=True)
        return scale * v / np.where(nrm > 0, nrm, 1.0)
    return VectorLoss("norm", lambda v: scale * np.linalg.norm(v, axis=-1), grad, abs(scale))


@dataclass(frozen=True)
class ContractionReport:
    left: float
    left_stderr: float
    right: float
    right_stderr: float
    lipschitz: float
    exact_sup: bool

    @property
    def rhs(self) -> float:
        return math.sqrt(2) * self.lipschitz * self.right

    @property
    def verdict(self) -> bool:
        slack = 4 * math.hypot(self.left_stderr, math.sqrt(2) * self.lipschitz * self.right_stderr)
        return self.left <= self.rhs + slack


def _sup_loss(x, sigma, cls, loss, rng, restarts=4, steps=60):
    if loss.coef is not None:
        # sum_i sigma_i coef . W x_i = <W, coef (sum sigma_i x_i)^T>
        return cls.cap * np.linalg.norm(loss.coef) * np.linalg.norm(sigma @ x)
    best = -np.inf
    for _ in range(restarts):
        w = cls.random_weights(rng)
        for _ in range(steps):
            v = x @ w.T
            g = (sigma[:, None] * loss.grad(v)).T @ x
            w = w + 0.5 * g / max(np.linalg.norm(g), 1e-12)
            w *= min(1.0, cls.cap / np.linalg.norm(w))
        best = max(best, float(sigma @ loss.fn(x @ w.T)))
    return best


def contraction_check(points: np.ndarray, cls: LinearEmbeddingClass, loss: VectorLoss,
                      num_draws: int = 500, seed=0) -> ContractionReport:
    """Both sides of ``E sup sum_i s_i h(f(x_i)) <= sqrt(2) L E sup sum_{i,k} s_ik f_k(x_i)``.

    ``points`` are the inputs ``x_i`` (rows, norm <= 1).  The right-hand
    supremum is exact: ``R ||S^T X||_F``.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2 or x.shape[1] != cls.input_dim:
        raise DomainError("points must be (m, D) with D the class input dimension")
    rng = make_rng(seed)
    lefts, rights = [], []
    for _ in range(num_draws):
        s = rng.integers(0, 2, x.shape[0]) * 2.0 - 1
        lefts.append(_sup_loss(x, s, cls, loss, rng))
        sk = rng.integers(0, 2, (x.shape[0], cls.output_dim)) * 2.0 - 1
        rights.append(cls.cap * np.linalg.norm(sk.T @ x))
    lefts, rights = np.array(lefts), np.array(rights)
    se = lambda a: float(a.std(ddof=1) / math.sqrt(a.size))  # noqa: E731
    return ContractionReport(float(lefts.mean()), se(lefts), float(rights.mean()), se(rights),
                             loss.lipschitz, loss.coef is not None)


# -- synthetic data and bound validity ----------------------------------------

def _unit_rows(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def synthetic_batch(n: int, k: int, dim: int, rng, noise: float = 0.5) -> ContrastiveBatch:
    """Anchors on the unit sphere; comparison 0 is a noisy copy, the rest are random."""
    rng = make_rng(rng)
    anchors = _unit_rows(rng.standard_normal((n, dim)))
    pos = _unit_rows(anchors + noise * rng.standard_normal((n, dim)))
    neg = _unit_rows(rng.standard_normal((n, k, dim)))
    return ContrastiveBatch(anchors, np.concatenate([pos[:, None, :], neg], axis=1))


@dataclass(frozen=True)
class BoundValidity:
    splits: int
    violations: int
    delta: float
    mean_bound: float
    mean_test_risk: float

    @property
    def rate(self) -> float:
        return self.violations / self.splits

    @property
    def verdict(self) -> bool:
        slack = 3 * math.sqrt(self.delta * (1 - self.delta) / self.splits)
        return self.rate <= self.delta + slack


def bound_validity_trials(splits: int = 200, n: int = 100, k: int = 2, dim: int = 6, out_dim: int = 3,
                          cap: float = 1.0, delta: float = 0.1, loss: LossSpec | None = None,
                          candidates: int = 16, num_draws: int = 100, seed=0) -> BoundValidity:
    """Count splits whose held-out risk exceeds :func:`generalization_bound`.

    Each split draws a training batch of ``n`` tuples and a held-out batch
    of ``10 n``, picks the best of ``candidates`` random weight matrices on
    the training batch, and compares the held-out risk with the bound.
    """
    loss = loss or hinge_loss_spec(0.5, k)
    cls = LinearEmbeddingClass(dim, out_dim, cap)
    rng = make_rng(seed)
    violations = 0
    bounds, risks = [], []
    for _ in range(splits):
        train = synthetic_batch(n, k, dim, rng)
        test = synthetic_batch(10 * n, k, dim, rng)
        ws = [cls.random_weights(rng) for _ in range(candidates)]
        emp = [empirical_risk(train, w, loss) for w in ws]
        best = int(np.argmin(emp))
        rad = rademacher_estimate(train, cls, num_draws, rng).value
        b = generalization_bound(emp[best], rad, loss.lipschitz, n, delta)
        r = empirical_risk(test, ws[best], loss)
        violations += r > b
        bounds.append(b)
        risks.append(r)
    return BoundValidity(splits, int(violations), delta, float(np.mean(bounds)), float(np.mean(risks)))


# -- batch files ---------------------------------------------------------------

def dumps_batch(batch: ContrastiveBatch) -> str:
    """Text form: header, ``n``/``k``/``D`` lines, then one row per tuple
    (anchor followed by the ``k + 1`` comparison points)."""
    lines = ["pac-lab batch", f"n {batch.n}", f"k {batch.k}", f"D {batch.dim}"]
    flat = np.concatenate([batch.anchors[:, None, :], batch.comparisons], axis=1).reshape(batch.n, -1)
    lines += [" ".join(repr(float(x)) for x in row) for row in flat]
    return "\n".join(lines) + "\n"


def loads_batch(text: str) -> ContrastiveBatch:
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or rows[0] != ["pac-lab", "batch"]:
        raise DomainError("missing 'pac-lab batch' header line")
    head = {}
    for key in ("n", "k", "D"):
        if len(rows) < 2 or rows[1][0] != key:
            raise DomainError(f"expected '{key}' header in batch file")
        head[key] = int(rows.pop(1)[1])
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    n, k, dim = head["n"], head["k"], head["D"]
    if data.shape != (n, (k + 2) * dim):
        raise DomainError(f"batch body has shape {data.shape}, expected {(n, (k + 2) * dim)}")
    data = data.reshape(n, k + 2, dim)
    return ContrastiveBatch(data[:, 0], data[:, 1:])
