"""Realizability oracle, shattering constructions and brute-force VC search.

For an arbitrary distance function a labeled query set is realizable iff the
"pair-order digraph" is acyclic.  Its nodes are the unordered point pairs
``{i, j}`` and each labeled query contributes the edge
``pair(anchor, closer) -> pair(anchor, farther)``.  An acyclic digraph
extends to a strict total order on all pairs.  Placing the ordered pairs at
distances evenly spaced in ``[N, 2N]`` gives a genuine metric, because any
three values in that range satisfy the triangle inequality.

Queries with different anchors can constrain the same pair (``(i, j, k)``
and ``(j, i, k)`` share ``{i, j}``), so the check runs on one global
digraph and never per anchor.
"""
from __future__ import annotations

import heapq
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import (
    Dataset,
    Embedding,
    Label,
    LabeledSample,
    MetricTable,
    TripletQuery,
    all_queries,
    dumps,
)
from .errors import BudgetExceededError, ContradictionError, DomainError, PreconditionError

DEFAULT_BUDGET = 2 ** 22


def pair_id(i: int, j: int, n: int) -> int:
    """Index of the unordered pair ``{i, j}`` among the ``C(n, 2)`` pairs."""
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def pair_of(idx: int, n: int) -> tuple[int, int]:
    for i in range(n - 1):
        row = n - i - 1
        if idx < row:
            return (i, i + 1 + idx)
        idx -= row
    raise DomainError(f"pair index out of range for n={n}")


def _as_samples(samples) -> list[LabeledSample]:
    out = []
    for s in samples:
        if isinstance(s, LabeledSample):
            out.append(s)
        else:
            q, lab = s
            q = q if isinstance(q, TripletQuery) else TripletQuery(*q)
            out.append(LabeledSample(q, Label(int(lab))))
    return out


def deduplicate(samples) -> list[LabeledSample]:
    """Merge repeated queries (including flipped views) into canonical form.

    Raises :class:`ContradictionError` when one query carries both labels.
    """
    seen: dict[tuple, LabeledSample] = {}
    for s in _as_samples(samples):
        q = s.query
        lab = s.label if q.is_canonical else s.label.flip()
        canon = LabeledSample(q.canonical(), lab, s.corrupted)
        prev = seen.get(q.key)
        if prev is None:
            seen[q.key] = canon
        elif prev.label != lab:
            raise ContradictionError(f"query {q.key} labeled both ways")
    return list(seen.values())


@dataclass(frozen=True)
class PairOrderDigraph:
    """Directed "strictly closer than" constraints between point pairs.

    ``edges[e] = (lo, hi)`` means ``rho(pair lo) < rho(pair hi)``; it was
    produced by ``samples[e]``.  Pair indices follow :func:`pair_id`.
    """

    n: int
    samples: tuple
    edges: tuple

    @classmethod
    def build(cls, dataset: Dataset, samples) -> "PairOrderDigraph":
        n = dataset.size
        uniq = deduplicate(samples)
        edges = []
        for s in uniq:
            q = s.query
            q.check(n)
            near, far = (q.first, q.second) if s.label == Label.FIRST_CLOSER else (q.second, q.first)
            edges.append((pair_id(q.anchor, near, n), pair_id(q.anchor, far, n)))
        return cls(n, tuple(uniq), tuple(edges))

    @property
    def num_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    def topological_order(self) -> list[int] | None:
        """Order of all pairs consistent with the edges, or None if cyclic."""
        return _topological_order(self.num_pairs, self.edges)

    def find_cycle(self) -> list[int] | None:
        """A directed cycle as a list of pair indices, or None."""
        return _find_directed_cycle(self.num_pairs, self.edges)


def _topological_order(num_nodes: int, edges) -> list[int] | None:
    # Kahn's algorithm with a min-heap so the order is deterministic.
    indeg = [0] * num_nodes
    succ = defaultdict(list)
    for a, b in edges:
        succ[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(num_nodes) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    return order if len(order) == num_nodes else None


def _find_directed_cycle(num_nodes: int, edges) -> list[int] | None:
    succ = defaultdict(list)
    for a, b in edges:
        succ[a].append(b)
    color = [0] * num_nodes  # 0 new, 1 on stack, 2 done
    parent = [-1] * num_nodes
    for root in range(num_nodes):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            w = next(it, None)
            if w is None:
                color[v] = 2
                stack.pop()
            elif color[w] == 0:
                color[w] = 1
                parent[w] = v
                stack.append((w, iter(succ[w])))
            elif color[w] == 1:
                cycle = [v]
                while cycle[-1] != w:
                    cycle.append(parent[cycle[-1]])
                return cycle[::-1]
    return None


def _is_acyclic(edges) -> bool:
    """Fast acyclicity test on a small edge list with arbitrary node ids."""
    indeg: dict = {}
    succ: dict = {}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
        indeg[b] = indeg.get(b, 0) + 1
        indeg.setdefault(a, 0)
    ready = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for w in succ.get(v, ()):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return seen == len(indeg)


@dataclass(frozen=True)
class Realizability:
    """Outcome of :func:`is_realizable_metric`."""

    realizable: bool
    certificate: MetricTable | None
    cycle: list | None  # list of (i, j) pairs with rho strictly increasing around the loop
    cycle_samples: list | None
    digraph: PairOrderDigraph

    def __bool__(self) -> bool:
        return self.realizable


def _metric_from_order(n: int, order: Sequence[int]) -> MetricTable:
    m = len(order)
    table = np.zeros((n, n))
    scale = n / (m - 1) if m > 1 else 0.0
    for rank, idx in enumerate(order):
        i, j = pair_of(idx, n)
        table[i, j] = table[j, i] = n + rank * scale
    return MetricTable(table)


def is_realizable_metric(dataset: Dataset, samples) -> Realizability:
    """Decide whether some distance function reproduces every label.

    On success a metric certificate is attached; otherwise the directed
    cycle of pairs (and the labeled queries forming it) is returned.
    """
    g = PairOrderDigraph.build(dataset, samples)
    order = g.topological_order()
    if order is not None:
        return Realizability(True, _metric_from_order(g.n, order), None, None, g)
    cyc = g.find_cycle()
    edge_to_sample = {e: s for e, s in zip(g.edges, g.samples)}
    steps = list(zip(cyc, cyc[1:] + cyc[:1]))
    return Realizability(
        False,
        None,
        [pair_of(v, g.n) for v in cyc],
        [edge_to_sample[e] for e in steps],
        g,
    )


def construct_metric_for_labeling(dataset: Dataset, samples) -> MetricTable:
    """Metric in ``[N, 2N]`` realizing an acyclic labeling.

    Pairs are ranked by a topological order of the pair digraph and the
    ranks ``0 .. C(N,2)-1`` are mapped affinely onto ``[N, 2N]``.
    """
    g = PairOrderDigraph.build(dataset, samples)
    order = g.topological_order()
    if order is None:
        raise PreconditionError("labeling has a cyclic pair-order digraph")
    return _metric_from_order(g.n, order)


# -- explicit families ---------------------------------------------------------

def consecutive_pair_family(n: int) -> list[TripletQuery]:
    """Queries ``(v_i, v_j, v_{j+1})`` for ``i < j``: ``(n-1)(n-2)/2`` of them."""
    if n < 3:
        return []
    return [TripletQuery(i, j, j + 1) for i in range(n - 2) for j in range(i + 1, n - 1)]


def shattering_embedding_queries(n: int, d: int) -> list[TripletQuery]:
    """Queries ``(x_i, y_1, y_j)`` for the l_p shattering construction.

    Anchors ``x_i`` are ids ``0 .. n-d-1``; ``y_j`` is id ``n - d + j - 1``.
    Row-major over anchors, then ``j = 2 .. d``.
    """
    _check_embedding_dims(n, d)
    y = lambda j: n - d + j - 1  # noqa: E731
    return [TripletQuery(i, y(1), y(j)) for i in range(n - d) for j in range(2, d + 1)]


def _check_embedding_dims(n: int, d: int) -> None:
    if not 2 <= d < n:
        raise DomainError(f"need 2 <= d < N, got d={d}, N={n}")


def construct_shattering_embedding(n: int, d: int, p: float, bits) -> Embedding:
    """Embedding that realizes any labeling of :func:`shattering_embedding_queries`.

    ``bits[i, j-2] = 0`` requests ``(x_i, y_1+, y_j-)`` (label -1) and ``1``
    requests label +1.  ``f(y_j) = e_j``; ``f(x_i) = (1/2, bits[i])``.
    The p-th-power gap of every query is exactly ``-1`` or ``+1``.
    """
    _check_embedding_dims(n, d)
    if not p > 0:
        raise DomainError(f"p must be positive, got {p}")
    bits = np.asarray(bits)
    if bits.shape != (n - d, d - 1) or not np.isin(bits, (0, 1)).all():
        raise DomainError(f"bits must be a 0/1 array of shape {(n - d, d - 1)}")
    coords = np.zeros((n, d))
    coords[: n - d, 0] = 0.5
    coords[: n - d, 1:] = bits
    coords[n - d:, :] = np.eye(d)
    return Embedding(coords, p)


def labels_from_bits(bits) -> np.ndarray:
    """Flattened labels requested by a bit array (0 -> -1, 1 -> +1)."""
    return np.where(np.asarray(bits).ravel() == 0, -1, 1).astype(np.int8)


# -- brute-force VC ------------------------------------------------------------

Oracle = Callable[[Dataset, Sequence[TripletQuery], Sequence[int]], bool]


def metric_oracle(dataset: Dataset, queries, labels) -> bool:
    """Arbitrary-distance hypothesis class: realizable iff acyclic."""
    return is_realizable_metric(dataset, list(zip(queries, labels))).realizable


@dataclass
class ShatteringReport:
    """Whether a query set is shattered, with a witness or certificates.

    For VC searches ``vcdim`` holds the maximum shatterable size and
    ``queries`` one maximum shattered set.
    """

    dataset: Dataset
    queries: list
    shattered: bool
    witness_labels: list | None = None
    witness_cycle: list | None = None
    vcdim: int | None = None
    oracle_calls: int = 0

    def certificates(self):
        """Yield ``(labels, MetricTable)`` for every labeling (metric class only)."""
        if not self.shattered:
            raise DomainError("set is not shattered; no certificate for every labeling")
        for labels in itertools.product((-1, 1), repeat=len(self.queries)):
            res = is_realizable_metric(self.dataset, list(zip(self.queries, labels)))
            yield labels, res.certificate

    def to_text(self, with_certificates: bool = False) -> str:
        lines = [f"# shattering report N={self.dataset.size}"]
        if self.vcdim is not None:
            lines.append(f"vcdim {self.vcdim}")
        lines.append(f"shattered {int(self.shattered)}")
        lines.append(f"oracle_calls {self.oracle_calls}")
        lines.append(dumps(self.queries).rstrip("\n") if self.queries else "pac-lab queries")
        if self.witness_labels is not None:
            lines.append("witness_labels " + " ".join(str(int(x)) for x in self.witness_labels))
        if self.witness_cycle is not None:
            lines.append("witness_cycle " + " ".join(f"{i}-{j}" for i, j in self.witness_cycle))
        if with_certificates and self.shattered:
            for labels, table in self.certificates():
                lines.append("certificate " + " ".join(str(x) for x in labels))
                lines.append(dumps(table).rstrip("\n"))
        return "\n".join(lines) + "\n"


def _fast_metric_checker(dataset: Dataset, universe: Sequence[TripletQuery]):
    n = dataset.size
    pairs = [(pair_id(q.anchor, q.first, n), pair_id(q.anchor, q.second, n)) for q in universe]

    def check(subset, labels) -> bool:
        edges = []
        for u, lab in zip(subset, labels):
            a, b = pairs[u]
            edges.append((a, b) if lab < 0 else (b, a))
        return _is_acyclic(edges)

    return check


def check_shattered(dataset: Dataset, queries, oracle: Oracle | None = None) -> ShatteringReport:
    """Test all ``2^k`` labelings of ``queries``; report the first failing one."""
    queries = [q if isinstance(q, TripletQuery) else TripletQuery(*q) for q in queries]
    calls = 0
    for labels in itertools.product((-1, 1), repeat=len(queries)):
        calls += 1
        if oracle is None:
            res = is_realizable_metric(dataset, list(zip(queries, labels)))
            ok, cycle = res.realizable, res.cycle
        else:
            ok, cycle = oracle(dataset, queries, labels), None
        if not ok:
            return ShatteringReport(dataset, queries, False, list(labels), cycle, oracle_calls=calls)
    return ShatteringReport(dataset, queries, True, oracle_calls=calls)


def brute_force_vcdim(
    dataset: Dataset,
    oracle: Oracle | None = None,
    universe: Sequence[TripletQuery] | None = None,
    budget: int = DEFAULT_BUDGET,
) -> ShatteringReport:
    """Exact VC dimension over a query universe by exhaustive search.

    Sizes are tried in increasing order; the search stops at the first size
    with no shattered subset (shattering is hereditary).  Each size ``k`` is
    refused up front if ``C(|U|, k) * 2^k`` exceeds ``budget``.

    ``oracle(dataset, queries, labels) -> bool`` decides realizability; the
    default is the arbitrary-distance (acyclicity) class.
    """
    universe = list(all_queries(dataset.size) if universe is None else universe)
    fast = _fast_metric_checker(dataset, universe) if oracle is None else None
    best: tuple = ()
    calls = 0
    for k in range(1, len(universe) + 1):
        cost = math.comb(len(universe), k) * 2 ** k
        if cost > budget:
            raise BudgetExceededError(
                f"size {k} needs up to {cost} oracle calls (budget {budget}); "
                f"VC dimension is at least {len(best)}"
            )
        found = None
        for subset in itertools.combinations(range(len(universe)), k):
            qs = [universe[u] for u in subset]
            ok = True
            for labels in itertools.product((-1, 1), repeat=k):
                calls += 1
                good = fast(subset, labels) if fast else oracle(dataset, qs, labels)
                if not good:
                    ok = False
                    break
            if ok:
                found = subset
                break
        if found is None:
            break
        best = found
    queries = [universe[u] for u in best]
    return ShatteringReport(dataset, queries, True, vcdim=len(best), oracle_calls=calls)


# -- cycle argument ------------------------------------------------------------

@dataclass(frozen=True)
class ForcingCycle:
    """An anchor with candidate cycle ``v_1 .. v_t`` and its unrealizable labeling.

    ``samples`` label the cycle queries so that
    ``rho(x, v_1) < rho(x, v_2) < ... < rho(x, v_t) < rho(x, v_1)``.
    """

    anchor: int
    vertices: list
    samples: list


def find_forcing_cycle(queries, n: int) -> ForcingCycle | None:
    """Find an anchor whose candidate-pair graph contains a cycle.

    Any anchor carrying at least ``n`` distinct queries has such a cycle
    (``n - 1`` candidates, ``n`` edges), which is guaranteed once there are
    ``n^2`` distinct queries in total.
    """
    by_anchor: dict[int, dict] = defaultdict(dict)
    for q in queries:
        q = q.query if isinstance(q, LabeledSample) else q
        q = q if isinstance(q, TripletQuery) else TripletQuery(*q)
        q.check(n)
        by_anchor[q.anchor].setdefault(frozenset((q.first, q.second)), q)
    for anchor in sorted(by_anchor):
        cyc = _undirected_cycle(by_anchor[anchor].keys())
        if cyc is None:
            continue
        edges = by_anchor[anchor]
        samples = []
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            q = edges[frozenset((a, b))]
            # rho(x, a) < rho(x, b)
            lab = Label.FIRST_CLOSER if q.first == a else Label.SECOND_CLOSER
            samples.append(LabeledSample(q, lab))
        return ForcingCycle(anchor, cyc, samples)
    return None


def _undirected_cycle(edges: Iterable[frozenset]) -> list | None:
    parent: dict = {}

    def root(v):
        while parent.setdefault(v, v) != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    adj: dict = defaultdict(list)
    for e in sorted(edges, key=sorted):
        a, b = sorted(e)
        ra, rb = root(a), root(b)
        if ra == rb:
            path = _forest_path(adj, a, b)
            return path
        parent[ra] = rb
        adj[a].append(b)
        adj[b].append(a)
    return None


def _forest_path(adj, src, dst) -> list:
    prev = {src: None}
    frontier = [src]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in prev:
                    prev[w] = v
                    nxt.append(w)
        frontier = nxt
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    return path[::-1]


# -- VC algebra over explicit label tables ------------------------------------

MAX_ALGEBRA_UNIVERSE = 20


def _as_table(rows) -> np.ndarray:
    t = np.asarray(rows, dtype=np.uint8)
    if t.ndim != 2:
        raise DomainError("a class must be a 2-D 0/1 label table")
    if t.shape[1] > MAX_ALGEBRA_UNIVERSE:
        raise BudgetExceededError(
            f"universe of {t.shape[1]} elements exceeds {MAX_ALGEBRA_UNIVERSE}")
    return np.unique(t, axis=0) if len(t) else t


def table_vcdim(rows) -> int:
    """VC dimension of a class given as a (hypotheses x universe) 0/1 table."""
    t = _as_table(rows)
    h, u = t.shape
    if h == 0:
        return -1
    best = 0
    k = 1
    while 2 ** k <= h and k <= u:
        weights = 1 << np.arange(k, dtype=np.int64)
        hit = False
        for subset in itertools.combinations(range(u), k):
            codes = t[:, subset].astype(np.int64) @ weights
            if len(np.unique(codes)) == 2 ** k:
                hit = True
                break
        if not hit:
            break
        best = k
        k += 1
    return best


def negation_class(a) -> np.ndarray:
    return 1 - _as_table(a)


def union_class(a, b) -> np.ndarray:
    a, b = _as_table(a), _as_table(b)
    return np.unique((a[:, None, :] | b[None, :, :]).reshape(-1, a.shape[1]), axis=0)


def intersection_class(a, b) -> np.ndarray:
    a, b = _as_table(a), _as_table(b)
    return np.unique((a[:, None, :] & b[None, :, :]).reshape(-1, a.shape[1]), axis=0)


@dataclass(frozen=True)
class AlgebraReport:
    vc_a: int
    vc_b: int
    vc_negation: int
    vc_union: int
    vc_intersection: int
    violations: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations


def vc_algebra_check(a, b) -> AlgebraReport:
    """Brute-force the VC dimensions of negations, unions and intersections."""
    a, b = _as_table(a), _as_table(b)
    if a.shape[1] != b.shape[1]:
        raise DomainError("classes must share a universe")
    va, vb = table_vcdim(a), table_vcdim(b)
    vn = table_vcdim(negation_class(a))
    vu = table_vcdim(union_class(a, b))
    vi = table_vcdim(intersection_class(a, b))
    bad = []
    if vn != va:
        bad.append(f"negation {vn} != {va}")
    if vu > va + vb + 1:
        bad.append(f"union {vu} > {va} + {vb} + 1")
    if vi > va + vb + 1:
        bad.append(f"intersection {vi} > {va} + {vb} + 1")
    return AlgebraReport(va, vb, vn, vu, vi, bad)
