"""
A lattice rule that can be fooled
=================================

The randomly dilated and shifted lattice rule is unbiased, yet for the
comb-like input below every node lands in a gap with probability of
order 1/n, returning zero although the integral is positive.
"""
import numpy as np

from confquad import Frolov1D, RandomSource, TrialPlan
from confquad.estimators import frolov_1d
from confquad.harness import clopper_pearson, run_trials
from confquad.testfn import make_frolov_counterexample

for n in (4, 8, 16, 32):
    f = make_frolov_counterexample(n, 1)
    est = run_trials(TrialPlan(Frolov1D(n), f, 1.0, 20000, 9), threads=4)
    zeros = sum(e.value == 0.0 for e in est)
    lo, hi = clopper_pearson(zeros, len(est))
    print(f"n={n:2d}: P(Q=0) ~ {zeros / len(est):.4f} [{lo:.4f}, {hi:.4f}]   1/(16n) = {1 / (16 * n):.4f}")

# With dilation fixed, averaging over the shift recovers the integral.
f = make_frolov_counterexample(8, 1)
vs = (np.arange(4000) + 0.5) / 4000
avg = np.mean([frolov_1d(f, 8, RandomSource(0), u=1.2, v=v).value for v in vs])
print("\nshift average:", avg, " exact:", f.exact_integral)
