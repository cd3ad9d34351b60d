import itertools

import numpy as np
import pytest

from pac_lab.core import all_queries


def ordering_label_table(n):
    """Labels of every canonical query under every strict order of the pair distances.

    Row r is the label vector induced by the r-th permutation of the
    ``C(n, 2)`` pair ranks.  Independent of the digraph machinery.
    """
    pairs = list(itertools.combinations(range(n), 2))
    pos = {p: t for t, p in enumerate(pairs)}
    queries = all_queries(n)
    a = np.array([pos[tuple(sorted((q.anchor, q.first)))] for q in queries])
    b = np.array([pos[tuple(sorted((q.anchor, q.second)))] for q in queries])
    ranks = np.array(list(itertools.permutations(range(len(pairs)))), dtype=np.int8)
    return queries, np.where(ranks[:, a] < ranks[:, b], -1, 1).astype(np.int8)


@pytest.fixture(scope="session")
def order_tables():
    return {n: ordering_label_table(n) for n in (3, 4)}
