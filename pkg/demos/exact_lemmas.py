"""
Binomial tail inequalities, checked exactly
===========================================

Left-hand sides are exact rationals. The transcendental right-hand side of
the first inequality is enclosed by interval arithmetic and compared using
the upper end of the enclosure.
"""
from fractions import Fraction

from confquad import bounds

for k, t in [(9, 1), (10, 0), (40, 3), (301, 38)]:
    res = bounds.lemma_a1_check(k, t)
    print(f"A1 k={k:3d} t={t:2d}: lhs={float(res.lhs):.4e}  rhs<={res.rhs:.4e}  holds={res.holds}")

for k, kp in [(5, 5), (10, 2), (60, 7)]:
    res = bounds.lemma_a2_check(k, kp)
    print(f"A2 k={k:3d} k'={kp:2d}: lhs={res.lhs}  >= 2^-{kp}: {res.holds}")

# Smallest failure probability any centre can reach for a Rademacher sum.
n = 17
k = 4 * n + 6
for e in (0, 4, 8.5, 17):
    p = bounds.bakhvalov_exact_uncertainty(k, e)
    ok = bounds.exceeds_third_power_of_quarter(p, Fraction(e) ** 2 / n)
    print(f"k={k}, e={e}: P = {float(p):.4e}  above (1/3) 4^(-e^2/n): {ok}")
