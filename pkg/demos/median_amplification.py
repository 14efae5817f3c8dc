"""
Boosting confidence with a median
=================================

An inner estimate that is wrong one time in eight becomes wrong far less
often once we take the median of k independent copies.
"""
from confquad import FailureInjector, Median, TrialPlan, empirical_failure
from confquad.bounds import median_failure_bound, median_repetitions

alpha = 1 / 8
for k in (1, 3, 5, 7, 9):
    plan = TrialPlan(Median(k, FailureInjector(alpha)), "const:c=0", epsilon=0.5, trials=20000, master_seed=3)
    s = empirical_failure(plan, threads=4)
    tight, loose = median_failure_bound(alpha, k)
    print(f"k={k}: observed {s.rate:.4f}  99% CI [{s.ci_low:.4f}, {s.ci_high:.4f}]  bound {tight:.4f} (loose {loose:.4f})")

for delta in (0.1, 0.01, 1e-6):
    print(f"delta={delta:g}: use k = {median_repetitions(delta)} repetitions")
