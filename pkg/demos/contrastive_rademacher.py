"""
Rademacher complexity of linear contrastive embeddings
======================================================

Monte Carlo estimates for a norm-bounded linear class, Lipschitz probes of
the losses and a check that the generalization bound holds on fresh data.
"""
import numpy as np

from pac_lab.rademacher import (
    LinearEmbeddingClass,
    binary_extremal_ratio,
    bound_validity_trials,
    distance_extremal_ratio,
    hinge_loss_spec,
    lipschitz_check_binary,
    lipschitz_check_distance,
    rademacher_estimate,
    synthetic_batch,
)

rng = np.random.default_rng(4)
cls = LinearEmbeddingClass(6, 3, 1.0)

# The estimate grows like sqrt(n) and with the number of negatives k.
for n in (25, 100, 400):
    for k in (1, 4):
        est = rademacher_estimate(synthetic_batch(n, k, 6, rng), cls, 400, seed=n + k)
        print(f"n={n:4d} k={k}: R_hat = {est.value:8.3f} +- {est.stderr:.3f}  (/sqrt(n) = {est.value / np.sqrt(n):.3f})")

# Random probes rarely find the worst case; the extremal inputs do.
ld = lipschitz_check_distance(20_000, seed=5)
lb = lipschitz_check_binary(20_000, seed=6)
print(f"\ndistance loss: random max ratio {ld.max_ratio:.3f}, extremal {distance_extremal_ratio():.4f}")
print(f"binary loss:   random max ratio {lb.max_ratio:.3f}, extremal {binary_extremal_ratio():.4f}")

bv = bound_validity_trials(splits=50, loss=hinge_loss_spec(0.5), seed=7)
print(f"\nbound violated on {bv.violations}/{bv.splits} splits; "
      f"mean bound {bv.mean_bound:.3f} vs mean test risk {bv.mean_test_risk:.3f}")
