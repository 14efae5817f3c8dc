"""
Error levels and envelopes
==========================

How the (epsilon, delta) formulas behave as the budget and the allowed
failure probability change.
"""
import numpy as np

from confquad import bounds

print("stratified Hoelder, beta=1, d=1")
for delta in (0.1, 0.01, 1e-4):
    eps = [bounds.strat_holder_epsilon(m, 1, 1.0, delta).epsilon for m in (16, 64, 256)]
    print(f"  delta={delta:g}: " + "  ".join(f"{e:.2e}" for e in eps))

print("\nenvelope n^(-r/d) min(1, (log(1/delta)/n)^(1-1/q)), r=1, d=1, n=1e4")
for p in (1.0, 1.5, 2.0, np.inf):
    vals = [bounds.rate_envelope(10**4, dl, 1, 1, p) for dl in (1e-1, 1e-3, 1e-6)]
    print(f"  p={p:>4}: " + "  ".join(f"{v:.3e}" for v in vals))

print("\nlower envelope, gamma=1:", bounds.lower_envelope_aux1(100, 0.01, 1.0))
