"""Closed-form sample-complexity bounds and Monte Carlo claim verifiers.

Unspecified absolute constants are explicit parameters ``c`` (default 1).
Polylogarithmic factors are reported as 1; only leading terms are
quantitative.  Logarithms are natural unless a name says ``log2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import Embedding, all_queries, embedding_labels, queries_to_array
from .errors import BudgetExceededError, DomainError, PreconditionError
from .seeding import make_rng

VARIANTS = ("arbitrary", "even", "odd", "const-d")


def _ceil(x: float) -> int:
    # absorb floating-point noise such as 1/0.1**2 == 99.99999999999999
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


def _check_unit(name, x, *, closed_right=False):
    ok = 0 < x <= 1 if closed_right else 0 < x < 1
    if not ok:
        rng = "(0, 1]" if closed_right else "(0, 1)"
        raise DomainError(f"{name} must lie in {rng}, got {x}")


# -- evaluators ----------------------------------------------------------------

def alpha_sample_size(alpha: float, delta: float, vc: int, c: float = 1.0) -> int:
    """``ceil((c / alpha^2) (VC + ln(1/delta)))`` examples form an alpha-sample w.p. 1-delta."""
    _check_unit("alpha", alpha, closed_right=True)
    _check_unit("delta", delta, closed_right=True)
    if vc < 1 or c <= 0:
        raise DomainError("need VC >= 1 and c > 0")
    return _ceil(c * (vc + math.log(1 / delta)) / alpha ** 2)


class NastyUpper(NamedTuple):
    n: int
    hoeffding_floor: int


def nasty_upper_bound(gap: float, delta: float, vc: int, c: float = 1.0) -> NastyUpper:
    """Samples sufficient for error ``2 eta + gap`` under nasty noise.

    ``n = ceil((c / gap^2)(VC + ln(1/delta)))``; the floor
    ``ceil((8 / gap^2) ln(2/delta))`` keeps the budget tail below ``delta/2``.
    """
    if gap <= 0 or vc < 1 or c <= 0:
        raise DomainError("need gap > 0, VC >= 1, c > 0")
    _check_unit("delta", delta)
    n = _ceil(c * (vc + math.log(1 / delta)) / gap ** 2)
    floor = _ceil(8 / gap ** 2 * math.log(2 / delta))
    return NastyUpper(n, floor)


def nasty_lower_bound(eta: float, gap: float, vc: int) -> tuple[float, float]:
    """The two lower-bound terms ``(eta / gap^2, VC / gap)``."""
    if eta < 0 or gap <= 0 or vc < 0:
        raise DomainError("need eta >= 0, gap > 0, VC >= 0")
    return eta / gap ** 2, vc / gap


class PacBounds(NamedTuple):
    lower: float
    upper: float


def _leading_terms(n: int, d: int, variant: str) -> tuple[float, float]:
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}")
    if n < 3 or d < 1:
        raise DomainError("need N >= 3 and d >= 1")
    if variant == "arbitrary":
        return n * n, n * n
    lower = min(n * d, n * n)
    if variant == "even":
        return lower, min(n * d, n * n)
    if variant == "odd":
        return lower, min(n * d * math.log(n), n * n)
    return lower, n


def pac_sample_bounds(n: int, d: int, variant: str, eps: float) -> PacBounds:
    """Leading terms of the noiseless lower and upper sample bounds, divided by ``eps``.

    ``variant``: ``arbitrary`` distances, l_p with ``even`` or ``odd`` p, or
    ``const-d`` (odd p, constant dimension).
    """
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    lo, hi = _leading_terms(n, d, variant)
    return PacBounds(lo / eps, hi / eps)


def nasty_distance_bounds(n: int, d: int, variant: str, eta: float, gap: float,
                          delta: float) -> PacBounds:
    """Noisy-case bounds for distance classes.

    Lower ``eta/gap^2 + T/gap``, upper ``(T' + ln(1/delta)) / gap^2`` with
    ``T, T'`` the noiseless leading terms of :func:`pac_sample_bounds`.
    """
    _check_unit("delta", delta)
    if eta < 0 or gap <= 0:
        raise DomainError("need eta >= 0 and gap > 0")
    lo, hi = _leading_terms(n, d, variant)
    return PacBounds(eta / gap ** 2 + lo / gap, (hi + math.log(1 / delta)) / gap ** 2)


def natarajan_sample_bounds(ndim: int, label_set_size: float, eps: float) -> PacBounds:
    """``(Ndim / eps, Ndim log|S| / eps)``; ``|S|`` is left to the caller."""
    if ndim < 0 or label_set_size < 2 or not 0 < eps < 1:
        raise DomainError("need Ndim >= 0, |S| >= 2, eps in (0, 1)")
    return PacBounds(ndim / eps, ndim * math.log(label_set_size) / eps)


def log2_milnor_component_bound(m: int, ell: int, k: int) -> float:
    """``log2((4 e k m / ell)^ell)``."""
    if not (m >= ell >= 2 and k >= 1):
        raise PreconditionError(f"need m >= ell >= 2 and k >= 1, got m={m}, ell={ell}, k={k}")
    return ell * (math.log2(4 * k * m / ell) + math.log2(math.e))


def milnor_component_bound(m: int, ell: int, k: int) -> float:
    """Cap on connected components of a polynomial non-vanishing set; ``inf`` on overflow."""
    lg = log2_milnor_component_bound(m, ell, k)
    return 2.0 ** lg if lg < 1023 else math.inf


def _unshatter_log2_gap(n: int, nd: int, log2_k: float, extra: float) -> float:
    # n - log2(RHS); positive iff 2^n > RHS
    return n - nd * (log2_k + math.log2(n)) - extra


def min_unshatterable_size(n_points: int, d: int, p: float, variant: str,
                           cap: int = 10 ** 9) -> int:
    """Least sample size at which the counting argument forces an unrealizable labeling.

    Solves ``2^n > (4 e p n / (N d))^(N d)`` (``even``), the same times
    ``N^(N d)`` (``odd``), or with ``4^d`` inside the base (``const-d``).
    The search starts where the component bound applies (``n >= Nd``, or
    ``4^d n >= Nd``) and the result is checked against its predecessor.
    """
    if variant not in ("even", "odd", "const-d"):
        raise DomainError("variant must be 'even', 'odd' or 'const-d'")
    if p < 1 or d < 1 or n_points < 2:
        raise DomainError("need p >= 1, d >= 1, N >= 2")
    if variant != "const-d" and d >= n_points:
        raise PreconditionError("even/odd variants need d < N")
    nd = n_points * d
    log2_k = math.log2(4 * math.e * p / nd)
    extra = nd * math.log2(n_points) if variant == "odd" else 0.0
    if variant == "const-d":
        log2_k += 2 * d
        start = max(1, math.ceil(nd / 4 ** d))
    else:
        start = nd
    ok = lambda n: _unshatter_log2_gap(n, nd, log2_k, extra) > 0  # noqa: E731
    lo, hi = start, start
    while not ok(hi):
        lo, hi = hi, hi * 2
        if hi > cap:
            raise BudgetExceededError(f"no solution below cap {cap}")
    if ok(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    assert ok(hi) and not ok(hi - 1)
    return hi


# -- regime gates --------------------------------------------------------------

class BayesWindow(NamedTuple):
    eps: float
    n_max: float     # n must stay below 17 eta (1 - eta) / (37 gap^2)
    n_min: float     # 51 / eps, the auxiliary assumption of the proof
    m_cap: float     # BAD_2: M <= 36 eta (eta + gap) / (37 gap^2)


def bayes_window(eta: float, gap: float, delta: float | None = None) -> BayesWindow:
    """Admissible sample-size window for the ``eta / gap^2`` lower bound."""
    if not eta > 0:
        raise PreconditionError(f"need eta > 0, got {eta}")
    if not 0 < gap < eta / 12:
        raise PreconditionError(f"need 0 < gap < eta/12 = {eta / 12}, got {gap}")
    if delta is not None and not 0 < delta < 1 / 342:
        raise PreconditionError(f"need 0 < delta < 1/342, got {delta}")
    eps = 2 * eta + gap
    return BayesWindow(eps, 17 * eta * (1 - eta) / (37 * gap ** 2), 51 / eps,
                       36 * eta * (eta + gap) / (37 * gap ** 2))


def vc_window(d: int, eps: float, gap: float, delta: float | None = None) -> float:
    """Largest sample size ``(d - 2) / (32 gap)`` covered by the ``VC / gap`` lower bound."""
    if d < 3:
        raise PreconditionError(f"need VC >= 3, got {d}")
    if not 0 < eps <= 1 / 8:
        raise PreconditionError(f"need 0 < eps <= 1/8, got {eps}")
    if not 0 < gap < eps:
        raise PreconditionError(f"need 0 < gap < eps, got {gap}")
    if delta is not None and not 0 < delta < 1 / 12:
        raise PreconditionError(f"need 0 < delta < 1/12, got {delta}")
    return (d - 2) / (32 * gap)


# -- exact binomial tails ------------------------------------------------------

def binomial_log_pmf(n: int, p: float) -> np.ndarray:
    """``log P[X = k]`` for ``k = 0..n``, ``X ~ Bin(n, p)``."""
    k = np.arange(n + 1)
    logc = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lp, lq = np.log(p), np.log1p(-p)
        # 0 * log(0) terms must vanish
        t1 = np.where(k > 0, k * lp, 0.0) if p == 0 else k * lp
        t2 = np.where(n - k > 0, (n - k) * lq, 0.0) if p == 1 else (n - k) * lq
    return logc + t1 + t2


def binomial_sf(k: int, n: int, p: float) -> float:
    """Exact ``P[X >= k]`` by log-space summation of the pmf."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    return float(np.exp(logsumexp(binomial_log_pmf(n, p)[k:])))


def binomial_cdf(k: int, n: int, p: float) -> float:
    """Exact ``P[X <= k]``."""
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    return float(np.exp(logsumexp(binomial_log_pmf(n, p)[: k + 1])))


# -- claim checks --------------------------------------------------------------

@dataclass(frozen=True)
class ClaimCheckReport:
    """One Monte Carlo (and, where available, exact) check of a claimed inequality.

    ``relation`` is ``">"`` when the claim is ``quantity > bound`` and
    ``"<="`` for ``quantity <= bound``.
    """

    claim: str
    estimate: float
    stderr: float
    trials: int
    bound: float
    relation: str
    exact: float | None
    verdict: bool
    detail: str = ""

    def as_row(self) -> dict:
        return {
            "claim": self.claim, "estimate": self.estimate, "stderr": self.stderr,
            "trials": self.trials, "bound": self.bound, "relation": self.relation,
            "exact": "" if self.exact is None else self.exact,
            "verdict": "pass" if self.verdict else "fail", "detail": self.detail,
        }


def _mc(hits: np.ndarray) -> tuple[float, float]:
    est = float(hits.mean())
    return est, math.sqrt(est * (1 - est) / hits.size)


def _judge(claim, est, se, trials, bound, relation, exact, detail) -> ClaimCheckReport:
    if exact is not None:
        holds = exact > bound if relation == ">" else exact <= bound
        exact_se = math.sqrt(exact * (1 - exact) / trials)
        consistent = abs(est - exact) <= 4 * exact_se + 1.0 / trials
        verdict = holds and consistent
        if not consistent:
            detail = (detail + "; " if detail else "") + "MC disagrees with exact value"
    elif relation == ">":
        verdict = est > bound - 3 * se
    else:
        verdict = est <= bound + 3 * se
    return ClaimCheckReport(claim, est, se, trials, bound, relation, exact, verdict, detail)


def verify_claim_3_5(n: int, p: float, trials: int = 10 ** 6, seed=0) -> list[ClaimCheckReport]:
    """Both binomial anti-concentration tails exceed 1/19 when ``N > 37/(pq)``.

    Upper: ``P[S >= floor(Np) + floor(sqrt(Npq - 1))]``;
    lower: ``P[S <= ceil(Np) - ceil(sqrt(Npq - 1))]``.
    """
    if not 0 < p < 1:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    q = 1 - p
    if not n > 37 / (p * q):
        raise PreconditionError(f"need N > 37/(pq) = {37 / (p * q):.3f}, got N={n}")
    spread = math.sqrt(n * p * q - 1)
    hi = math.floor(n * p) + math.floor(spread)
    lo = math.ceil(n * p) - math.ceil(spread)
    s = make_rng(seed).binomial(n, p, size=trials)
    reports = []
    for name, hits, exact in (
        ("claim_3_5_upper", s >= hi, binomial_sf(hi, n, p)),
        ("claim_3_5_lower", s <= lo, binomial_cdf(lo, n, p)),
    ):
        est, se = _mc(hits)
        reports.append(_judge(name, est, se, trials, 1 / 19, ">", exact, f"N={n} p={p}"))
    return reports


@dataclass(frozen=True, eq=False)
class DiscreteLaw:
    """A random variable on ``[0, upper]`` with finite support."""

    values: np.ndarray
    probs: np.ndarray
    upper: float

    @classmethod
    def binomial(cls, n: int, p: float) -> "DiscreteLaw":
        return cls(np.arange(n + 1, dtype=float), np.exp(binomial_log_pmf(n, p)), float(n))

    @classmethod
    def point(cls, value: float, upper: float) -> "DiscreteLaw":
        return cls(np.array([float(value)]), np.array([1.0]), float(upper))

    @property
    def mean(self) -> float:
        return float(self.values @ self.probs)

    def tail(self, threshold: float) -> float:
        return float(self.probs[self.values >= threshold].sum())

    def sample(self, size: int, rng) -> np.ndarray:
        return make_rng(rng).choice(self.values, size=size, p=self.probs / self.probs.sum())


def verify_claim_3_7(alpha: float, beta: float, law: DiscreteLaw, trials: int = 10 ** 5,
                     seed=0) -> ClaimCheckReport:
    """``P[S >= beta N] > (alpha - beta) / (1 - beta)`` for ``S`` in ``[0, N]`` with mean ``alpha N``."""
    if not 0 < beta < alpha <= 1:
        raise DomainError(f"need 0 < beta < alpha <= 1, got alpha={alpha}, beta={beta}")
    values = np.asarray(law.values)
    if values.min() < 0 or values.max() > law.upper:
        raise PreconditionError("support must lie in [0, N]")
    if abs(law.mean / law.upper - alpha) > 1e-6:
        raise PreconditionError(f"law mean {law.mean} != alpha * N = {alpha * law.upper}")
    threshold = beta * law.upper
    hits = law.sample(trials, seed) >= threshold
    est, se = _mc(hits)
    bound = (alpha - beta) / (1 - beta)
    return _judge("claim_3_7", est, se, trials, bound, ">", law.tail(threshold),
                  f"alpha={alpha} beta={beta} N={law.upper:g}")


def verify_budget_concentration(n: int, eta: float, gap: float, trials: int = 10 ** 6,
                                seed=0) -> ClaimCheckReport:
    """``P[m > (eta + gap/4) n] <= exp(-n gap^2 / 8)`` for ``m ~ Bin(n, eta)``."""
    if n < 1 or not 0 <= eta <= 1 or gap <= 0:
        raise DomainError("need n >= 1, eta in [0, 1], gap > 0")
    threshold = (eta + gap / 4) * n
    k = math.floor(threshold) + 1  # m > threshold  <=>  m >= k
    exact = 0.0 if eta == 0 else binomial_sf(k, n, eta)
    m = make_rng(seed).binomial(n, eta, size=trials)
    est, se = _mc(m > threshold)
    bound = math.exp(-n * gap ** 2 / 8)
    return _judge("budget_concentration", est, se, trials, bound, "<=", exact,
                  f"n={n} eta={eta} gap={gap}")


# -- sign cells ----------------------------------------------------------------

@dataclass(frozen=True)
class SignCellReport:
    samples: int
    distinct_patterns: int
    resampled: int
    mismatches: int
    milnor_bound: float | None

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def triplet_polynomials(vec: np.ndarray, n: int, d: int, p: int, queries: np.ndarray) -> np.ndarray:
    """``P_q(V) = sum_j (f_j(x) - f_j(y))^p - sum_j (f_j(x) - f_j(z))^p`` for each query."""
    f = vec.reshape(n, d)
    a, b, c = queries[:, 0], queries[:, 1], queries[:, 2]
    return ((f[a] - f[b]) ** p).sum(axis=1) - ((f[a] - f[c]) ** p).sum(axis=1)


def sign_cell_disjointness(n: int, d: int, p: int, num_samples: int = 10 ** 4, queries=None,
                           seed=0, max_resample: int = 100) -> SignCellReport:
    """Sample embeddings and check each lands in exactly one sign cell ``C_h``.

    The sign pattern of the even-p triplet polynomials must equal the label
    vector computed from the l_p distances, so a point cannot belong to two
    cells and its cell is the labeling it realizes.  Points on a zero set are
    redrawn and counted.
    """
    if p < 2 or p % 2:
        raise DomainError(f"sign cells use even integer p, got {p}")
    q = queries_to_array(all_queries(n) if queries is None else queries)
    rng = make_rng(seed)
    patterns = set()
    resampled = mismatches = 0
    for _ in range(num_samples):
        for _ in range(max_resample):
            vec = rng.standard_normal(n * d)
            vals = triplet_polynomials(vec, n, d, p, q)
            if np.all(vals != 0):
                break
            resampled += 1
        else:
            raise DomainError("could not avoid the zero set")
        signs = np.where(vals < 0, -1, 1).astype(np.int8)
        labels = embedding_labels(Embedding(vec.reshape(n, d), p), q)
        mismatches += int(not np.array_equal(signs, labels))
        patterns.add(signs.tobytes())
    m, ell = len(q), n * d
    milnor = milnor_component_bound(m, ell, p) if m >= ell >= 2 else None
    return SignCellReport(num_samples, len(patterns), resampled, mismatches, milnor)
