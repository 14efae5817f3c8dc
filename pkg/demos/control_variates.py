"""
Separating the main part
========================

Interpolate f on a grid, integrate the interpolant exactly and only sample
the residual. On a smooth bump the error falls much faster than for
sampling alone.
"""
import numpy as np

from confquad import ControlVariate, PlainMC, fit_rate, sweep
from confquad.estimators import multilinear_interpolant
from confquad.testfn import make_sobolev_poly_bump

f = make_sobolev_poly_bump(2, 2.0, 1)
probe = np.linspace(0, 1, 20001).reshape(-1, 1)
for m in (8, 16, 32, 64):
    g, integral, nodes = multilinear_interpolant(f, m)
    print(f"m_grid={m:3d}: sup|f-g| = {np.max(np.abs(f(probe) - g(probe))):.2e}, "
          f"int g - int f = {integral - f.exact_integral:+.2e}")

ns = [2**i for i in range(6, 13)]
cv = sweep(ns, lambda n: ControlVariate(n // 2, n // 2), f, 500, "median-abs-error", 5)
mc = sweep(ns, PlainMC, f, 500, "median-abs-error", 5)
print("\ncontrol variates exponent:", round(fit_rate([(r.n, r.statistic) for r in cv]).slope, 3))
print("plain sampling exponent:  ", round(fit_rate([(r.n, r.statistic) for r in mc]).slope, 3))
