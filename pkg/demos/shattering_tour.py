"""
Which triplet labelings can a metric realize?
=============================================

Walks through the exact oracle, the two shattering constructions and a
forcing cycle on small point sets.
"""
import numpy as np

from pac_lab import Dataset, TripletQuery, labeled, metric_labels
from pac_lab.shattering import (
    brute_force_vcdim,
    consecutive_pair_family,
    construct_metric_for_labeling,
    construct_shattering_embedding,
    find_forcing_cycle,
    is_realizable_metric,
    shattering_embedding_queries,
)
from pac_lab.core import all_queries, embedding_labels

rng = np.random.default_rng(3)

# A query (a, b, c) asks whether a is closer to b (-1) or to c (+1).
# For arbitrary metrics the VC dimension on N points is C(N,2) - 1.
for n in (3, 4):
    res = brute_force_vcdim(Dataset(n))
    print(f"N={n}: VC dimension {res.vcdim}, shattered set {[(q.anchor, q.first, q.second) for q in res.queries]}")

# Realizability reduces to acyclicity of a digraph on pairs.  An acyclic
# labeling comes with an explicit metric whose distances lie in [N, 2N].
queries = consecutive_pair_family(6)
labels = rng.choice([-1, 1], len(queries))
samples = labeled(queries, labels)
table = construct_metric_for_labeling(Dataset(6), samples)
print("\nconsecutive family on 6 points:", len(queries), "queries")
print("metric reproduces the labels:", np.array_equal(metric_labels(table, queries), labels))
print("distance range:", table.values[np.triu_indices(6, 1)].min(), "to", table.values.max())

# In l_p the construction f(y_j) = e_j, f(x_i) = (1/2, bits) shatters
# (N - d)(d - 1) queries with a p-th power gap of exactly +-1.
n, d, p = 7, 3, 2
qs = shattering_embedding_queries(n, d)
bits = rng.integers(0, 2, (n - d, d - 1))
emb = construct_shattering_embedding(n, d, p, bits)
print(f"\nl_{p} embedding, N={n}, d={d}: {len(qs)} queries")
print("requested:", np.where(bits.ravel() == 0, -1, 1))
print("realized: ", embedding_labels(emb, qs))

# Too many queries around one anchor close a cycle, and the cyclic
# labeling cannot come from any metric.
qs = all_queries(5)
fc = find_forcing_cycle(qs, 5)
print(f"\nforcing cycle at anchor {fc.anchor}: {fc.vertices}")
print("realizable:", is_realizable_metric(Dataset(5), fc.samples).realizable)
print("e.g.", fc.samples[0].query, "->", int(fc.samples[0].label))
