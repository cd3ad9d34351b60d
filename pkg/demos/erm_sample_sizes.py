"""
How many samples does ERM need?
===============================

Calibrates the constant in n = c (d + ln(2/delta)) / gap^2 and compares the
sample-size bounds for metric and l_p triplet classes.
"""
from pac_lab.bounds import min_unshatterable_size, nasty_distance_bounds, pac_sample_bounds
from pac_lab.experiments import ExperimentConfig, run

res = run(ExperimentConfig.build("erm-curve", {"trials": 200}, seed=2))
print(res.report())
for r in res.records[-4:]:
    print(r.values)

# Leading terms of the clean and noisy bounds, constants dropped, so only
# the growth in N, d and 1/eps is meaningful.
for variant in ("arbitrary", "even", "odd", "const-d"):
    b = pac_sample_bounds(50, 2, variant, 0.1)
    print(f"{variant:10s} clean: lower {b.lower:12.1f} upper {b.upper:12.1f}")
    nb = nasty_distance_bounds(50, 2, variant, 0.05, 0.01, 0.05)
    print(f"{'':10s} noisy: lower {nb.lower:12.1f} upper {nb.upper:12.1f}")

# Sign-pattern counting gives a concrete point set too large to shatter.
print("\nsmallest unshatterable query count, N=20, d=2, p=2:",
      min_unshatterable_size(20, 2, 2, "even"))
