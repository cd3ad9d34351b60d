"""Ground types for triplet queries and the two distance models.

A triplet query ``(anchor, first, second)`` asks which candidate lies closer
to the anchor.  Labels follow the sign convention of the hypothesis
``h(x, y, z) = sign(rho(x, y) - rho(x, z))``:

* ``-1`` means ``rho(anchor, first) < rho(anchor, second)`` (written
  ``(x, y+, z-)``),
* ``+1`` means ``rho(anchor, first) > rho(anchor, second)``.

``sign(0)`` is resolved to ``+1`` and a :class:`~pac_lab.errors.TieWarning`
is emitted so that ties are never silent.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, TieWarning

__all__ = [
    "Dataset",
    "Embedding",
    "Label",
    "LabeledSample",
    "MetricReport",
    "MetricTable",
    "TripletQuery",
    "all_queries",
    "dumps",
    "embedding_labels",
    "evaluate_embedding_hypothesis",
    "evaluate_metric_hypothesis",
    "labeled",
    "loads",
    "lp_distance",
    "metric_labels",
    "pth_power_gap",
    "queries_to_array",
    "validate_metric",
]


class Label(IntEnum):
    """Outcome of a triplet comparison."""

    FIRST_CLOSER = -1
    SECOND_CLOSER = 1

    def flip(self) -> "Label":
        return Label(-int(self))


@dataclass(frozen=True)
class Dataset:
    """A ground set of ``size`` abstract points with ids ``0 .. size-1``."""

    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise DomainError(f"dataset size must be an integer >= 2, got {self.size!r}")

    @property
    def points(self) -> range:
        return range(self.size)

    def check(self, *ids: int) -> None:
        for i in ids:
            if not 0 <= i < self.size:
                raise DomainError(f"point id {i} outside 0..{self.size - 1}")


@dataclass(frozen=True)
class TripletQuery:
    """An ordered query ``(anchor, first, second)`` over distinct point ids.

    ``(anchor, {first, second})`` identifies the query; swapping the two
    candidates yields the label-flipped view of the same query.
    """

    anchor: int
    first: int
    second: int

    def __post_init__(self):
        ids = (self.anchor, self.first, self.second)
        if min(ids) < 0:
            raise DomainError(f"negative point id in {ids}")
        if len(set(ids)) != 3:
            raise DomainError(f"triplet ids must be distinct, got {ids}")

    @property
    def key(self) -> tuple[int, int, int]:
        """Deduplication key: anchor followed by the sorted candidate pair."""
        a, b = sorted((self.first, self.second))
        return (self.anchor, a, b)

    @property
    def is_canonical(self) -> bool:
        return self.first < self.second

    def flipped(self) -> "TripletQuery":
        return TripletQuery(self.anchor, self.second, self.first)

    def canonical(self) -> "TripletQuery":
        return self if self.is_canonical else self.flipped()

    def check(self, n: int) -> None:
        if max(self.anchor, self.first, self.second) >= n:
            raise DomainError(f"query {self} references a point outside 0..{n - 1}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.anchor, self.first, self.second)


@dataclass(frozen=True)
class LabeledSample:
    """A query with its (possibly corrupted) label.

    ``corrupted`` is harness-side metadata; learners never read it.
    """

    query: TripletQuery
    label: Label
    corrupted: bool = False


def all_queries(n: int) -> list[TripletQuery]:
    """Every query over ``n`` points in canonical form (``first < second``)."""
    out = []
    for a in range(n):
        others = [v for v in range(n) if v != a]
        for i, b in enumerate(others):
            for c in others[i + 1:]:
                out.append(TripletQuery(a, b, c))
    return out


def queries_to_array(queries: Iterable) -> np.ndarray:
    """Stack queries (objects or 3-tuples) into an ``(k, 3)`` int array."""
    rows = [q.as_tuple() if isinstance(q, TripletQuery) else tuple(q) for q in queries]
    return np.asarray(rows, dtype=np.int64).reshape(-1, 3)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MetricTable:
    """An explicit ``N x N`` distance table.

    Only the shape and finiteness are enforced here; symmetry, the zero
    diagonal and the triangle inequality are checked by :func:`validate_metric`.
    """

    values: np.ndarray

    def __post_init__(self):
        v = _readonly(self.values)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise DomainError(f"metric table must be square with N >= 2, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("metric table contains non-finite entries")
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def __call__(self, i: int, j: int) -> float:
        return float(self.values[i, j])


@dataclass(frozen=True, eq=False)
class Embedding:
    """Coordinates ``f(v)`` for each point, compared with the l_p distance."""

    coords: np.ndarray
    p: float = 2.0
    cap: float | None = None

    def __post_init__(self):
        c = _readonly(self.coords)
        if c.ndim != 2 or c.shape[1] < 1 or c.shape[0] < 2:
            raise DomainError(f"coords must be (N >= 2, d >= 1), got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DomainError("embedding contains non-finite coordinates")
        if not self.p > 0:
            raise DomainError(f"exponent p must be positive, got {self.p}")
        if self.cap is not None:
            if not self.cap > 0:
                raise DomainError(f"norm cap must be positive, got {self.cap}")
            worst = np.linalg.norm(c, axis=1).max()
            if worst > self.cap * (1 + 1e-12):
                raise DomainError(f"row norm {worst} exceeds cap {self.cap}")
        object.__setattr__(self, "coords", c)

    @property
    def size(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def table(self) -> MetricTable:
        """Materialize all pairwise l_p distances."""
        diff = np.abs(self.coords[:, None, :] - self.coords[None, :, :])
        return MetricTable((diff ** self.p).sum(axis=-1) ** (1.0 / self.p))


def _check_ids(n: int, ids) -> None:
    for i in ids:
        if not 0 <= i < n:
            raise DomainError(f"point id {i} outside 0..{n - 1}")


def _sign_with_tie(gap: float, q) -> Label:
    if gap < 0:
        return Label.FIRST_CLOSER
    if gap == 0:
        warnings.warn(f"tied distances for query {q}; labeling +1", TieWarning, stacklevel=3)
    return Label.SECOND_CLOSER


def evaluate_metric_hypothesis(table: MetricTable, q: TripletQuery) -> Label:
    """Label of ``q`` under the distance table."""
    _check_ids(table.size, q.as_tuple())
    gap = table.values[q.anchor, q.first] - table.values[q.anchor, q.second]
    return _sign_with_tie(gap, q)


def lp_distance(e: Embedding, a: int, b: int) -> float:
    """``(sum_t |f(a)_t - f(b)_t|^p)^(1/p)``."""
    _check_ids(e.size, (a, b))
    diff = np.abs(e.coords[a] - e.coords[b])
    return float((diff ** e.p).sum() ** (1.0 / e.p))


def pth_power_gap(e: Embedding, q: TripletQuery) -> float:
    """``||f(x)-f(y)||_p^p - ||f(x)-f(z)||_p^p``; same sign as the distance gap."""
    _check_ids(e.size, q.as_tuple())
    c = e.coords
    return float((np.abs(c[q.anchor] - c[q.first]) ** e.p).sum()
                 - (np.abs(c[q.anchor] - c[q.second]) ** e.p).sum())


def evaluate_embedding_hypothesis(e: Embedding, q: TripletQuery) -> Label:
    """Label of ``q`` under the l_p distance of the embedding."""
    gap = lp_distance(e, q.anchor, q.first) - lp_distance(e, q.anchor, q.second)
    return _sign_with_tie(gap, q)


def _labels_from_gaps(gaps: np.ndarray) -> np.ndarray:
    ties = int(np.count_nonzero(gaps == 0))
    if ties:
        warnings.warn(f"{ties} tied queries labeled +1", TieWarning, stacklevel=3)
    return np.where(gaps < 0, -1, 1).astype(np.int8)


def metric_labels(table: MetricTable, queries) -> np.ndarray:
    """Vectorized :func:`evaluate_metric_hypothesis` over many queries."""
    q = queries_to_array(queries)
    _check_ids(table.size, q.ravel())
    v = table.values
    return _labels_from_gaps(v[q[:, 0], q[:, 1]] - v[q[:, 0], q[:, 2]])


def embedding_labels(e: Embedding, queries, *, power_gap: bool = False) -> np.ndarray:
    """Vectorized :func:`evaluate_embedding_hypothesis` over many queries.

    With ``power_gap=True`` the p-th powers are compared instead of the
    distances themselves (same sign, exact for the integer-valued
    constructions).
    """
    q = queries_to_array(queries)
    _check_ids(e.size, q.ravel())
    c = e.coords
    near = (np.abs(c[q[:, 0]] - c[q[:, 1]]) ** e.p).sum(axis=1)
    far = (np.abs(c[q[:, 0]] - c[q[:, 2]]) ** e.p).sum(axis=1)
    if not power_gap:
        near, far = near ** (1.0 / e.p), far ** (1.0 / e.p)
    return _labels_from_gaps(near - far)


@dataclass(frozen=True)
class MetricReport:
    """Violations found by :func:`validate_metric`."""

    asymmetric: list = field(default_factory=list)
    nonzero_diagonal: list = field(default_factory=list)
    negative: list = field(default_factory=list)
    triangle: list = field(default_factory=list)

    @property
    def is_metric(self) -> bool:
        return not (self.asymmetric or self.nonzero_diagonal or self.negative or self.triangle)

    def __bool__(self) -> bool:
        return self.is_metric


def validate_metric(table: MetricTable, tol: float = 0.0) -> MetricReport:
    """List every violated metric axiom.

    Triangle violations are reported as ``(i, j, k)`` with ``i < k`` meaning
    ``d(i, k) > d(i, j) + d(j, k) + tol``.
    """
    v = table.values
    n = table.size
    iu = np.triu_indices(n, 1)
    asym = [(int(i), int(j)) for i, j in zip(*iu) if abs(v[i, j] - v[j, i]) > tol]
    diag = [int(i) for i in range(n) if v[i, i] != 0]
    neg = [(int(i), int(j)) for i, j in zip(*np.nonzero(v < 0))]
    # via[i, j, k] = d(i, j) + d(j, k)
    via = v[:, :, None] + v[None, :, :]
    bad = v[:, None, :] > via + tol
    idx = np.arange(n)
    bad[idx, idx, :] = False
    bad[:, idx, idx] = False
    tri = [(int(i), int(j), int(k)) for i, j, k in zip(*np.nonzero(bad)) if i < k]
    return MetricReport(asym, diag, neg, tri)


# -- plain-text serialization -------------------------------------------------

_MAGIC = "pac-lab"


def _fmt(x: float) -> str:
    return repr(float(x))


def dumps(obj) -> str:
    """Serialize a Dataset, MetricTable, Embedding, or a query/sample list."""
    lines: list[str]
    if isinstance(obj, Dataset):
        lines = [f"{_MAGIC} dataset", f"N {obj.size}"]
    elif isinstance(obj, MetricTable):
        lines = [f"{_MAGIC} metric", f"N {obj.size}"]
        lines += [" ".join(_fmt(x) for x in row) for row in obj.values]
    elif isinstance(obj, Embedding):
        cap = "none" if obj.cap is None else _fmt(obj.cap)
        lines = [f"{_MAGIC} embedding", f"N {obj.size}", f"d {obj.dim}",
                 f"p {_fmt(obj.p)}", f"R {cap}"]
        lines += [" ".join(_fmt(x) for x in row) for row in obj.coords]
    else:
        items = list(obj)
        if all(isinstance(s, LabeledSample) for s in items):
            lines = [f"{_MAGIC} labeled"]
            lines += [f"{s.query.anchor} {s.query.first} {s.query.second} "
                      f"{int(s.label)} {int(s.corrupted)}" for s in items]
        elif all(isinstance(q, TripletQuery) for q in items):
            lines = [f"{_MAGIC} queries"]
            lines += ["{} {} {}".format(*q.as_tuple()) for q in items]
        else:
            raise TypeError(f"cannot serialize {type(obj).__name__}")
    return "\n".join(lines) + "\n"


def loads(text: str):
    """Inverse of :func:`dumps`.  Blank lines and ``#`` comments are ignored."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows or rows[0][0] != _MAGIC or len(rows[0]) != 2:
        raise DomainError("missing 'pac-lab <kind>' header line")
    kind, body = rows[0][1], rows[1:]

    def header(key):
        if not body or body[0][0] != key:
            raise DomainError(f"expected '{key}' header in {kind} file")
        return body.pop(0)[1]

    if kind == "dataset":
        return Dataset(int(header("N")))
    if kind == "metric":
        n = int(header("N"))
        values = np.array([[float(x) for x in r] for r in body])
        if values.shape != (n, n):
            raise DomainError(f"metric body has shape {values.shape}, expected {(n, n)}")
        return MetricTable(values)
    if kind == "embedding":
        n, d = int(header("N")), int(header("d"))
        p = float(header("p"))
        cap = header("R")
        coords = np.array([[float(x) for x in r] for r in body])
        if coords.shape != (n, d):
            raise DomainError(f"embedding body has shape {coords.shape}, expected {(n, d)}")
        return Embedding(coords, p, None if cap == "none" else float(cap))
    if kind == "queries":
        return [TripletQuery(*map(int, r[:3])) for r in body]
    if kind == "labeled":
        out = []
        for r in body:
            corrupted = bool(int(r[4])) if len(r) > 4 else False
            out.append(LabeledSample(TripletQuery(*map(int, r[:3])), Label(int(r[3])), corrupted))
        return out
    raise DomainError(f"unknown kind {kind!r}")


def labeled(queries: Sequence[TripletQuery], labels) -> list[LabeledSample]:
    """Zip queries with labels into :class:`LabeledSample` objects."""
    labels = list(labels)
    if len(labels) != len(queries):
        raise DomainError("queries and labels differ in length")
    return [LabeledSample(q, Label(int(l))) for q, l in zip(queries, labels)]
