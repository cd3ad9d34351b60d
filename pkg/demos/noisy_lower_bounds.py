"""
Why nasty noise costs eta / gap^2 samples
=========================================

Two-point adversaries make the learner face a biased coin.  The exact
failure probability of the Bayes majority vote shows how slowly it decays.
"""
import numpy as np

from pac_lab.adversaries import indistinguishable_adversary
from pac_lab.bounds import bayes_window, vc_window
from pac_lab.experiments import ExperimentConfig, bayes_failure_probability, run
from pac_lab.seeding import make_rng

# At gap 0 the adversary makes both targets produce the same observations.
rng = make_rng(1)
for target in (1, 2):
    s = indistinguishable_adversary(0.1, 200_000, target, rng)
    qid, lab = s.observed()
    freq = [np.mean((qid == 0) & (lab < 0)), np.mean((qid == 1) & (lab < 0)), np.mean((qid == 1) & (lab > 0))]
    print(f"target h{target}: outcome frequencies", np.round(freq, 4))

# With a small gap the Bayes rule still needs about eta / gap^2 samples.
eta, gap = 0.12, 0.009
w = bayes_window(eta, gap)
print(f"\neta={eta}, gap={gap}: admissible n in [{w.n_min:.0f}, {w.n_max:.0f}]")
for n in (100, 300, 598, 2000, 5980, 20000):
    print(f"  n={n:6d}  exact failure {bayes_failure_probability(eta, gap, n):.4f}")
print("the 1/342 level is", round(1 / 342, 5))

# The VC adversary spreads gap over d - 2 queries instead.
print(f"\nVC window at d=12, eps=0.11, gap=0.01: n <= {vc_window(12, 0.11, 0.01):.2f}")
res = run(ExperimentConfig.build("vc-lb", {"trials": 2000}, seed=3))
print(res.report())
