"""Repeated-trial experiments: failure rates, error samples, budget sweeps, rate fits.

Trial ``t`` of a plan always runs on ``RandomSource(master_seed, stream).child(t)``,
so results do not depend on how trials are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import stats

from . import estimators as est
from .errors import ParameterError
from .testfn import TestFunction

__all__ = [
    "TrialPlan",
    "FailureStats",
    "RateFit",
    "clopper_pearson",
    "run_trials",
    "empirical_failure",
    "error_samples",
    "fit_rate",
    "sweep",
    "STATISTICS",
    "CP_LEVEL",
]

CP_LEVEL = 0.99
STATISTICS = ("median-abs-error", "rmse", "failure-rate")


@dataclass(frozen=True)
class TrialPlan:
    """``trials`` independent runs of ``estimator`` on ``function`` judged at ``epsilon``.

    ``function`` is a :class:`TestFunction` or a descriptor string understood
    by :func:`confquad.descriptors.parse_function`.
    """

    estimator: est.EstimatorKind
    function: Union[TestFunction, str]
    epsilon: float
    trials: int
    master_seed: int
    stream: tuple = ()

    def __post_init__(self):
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ParameterError("trials must be a positive integer")
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be positive")

    @property
    def root(self) -> est.RandomSource:
        return est.RandomSource(self.master_seed, tuple(self.stream))

    def resolve_function(self) -> TestFunction:
        if isinstance(self.function, TestFunction):
            return self.function
        from .descriptors import parse_function

        return parse_function(self.function)


@dataclass(frozen=True)
class FailureStats:
    trials: int
    failures: int
    rate: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple


def clopper_pearson(failures: int, trials: int, level: float = CP_LEVEL) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval from beta quantiles."""
    if trials < 1 or not 0 <= failures <= trials:
        raise ParameterError("need 0 <= failures <= trials and trials >= 1")
    a = 1.0 - level
    lo = 0.0 if failures == 0 else float(stats.beta.ppf(a / 2, failures, trials - failures + 1))
    hi = 1.0 if failures == trials else float(stats.beta.ppf(1 - a / 2, failures + 1, trials - failures))
    return lo, hi


def run_trials(plan: TrialPlan, threads: int = 1) -> list:
    """All estimates of ``plan`` in trial order."""
    f = plan.resolve_function()
    root = plan.root

    def one(t):
        return est.run(plan.estimator, f, root.child(t))

    if threads <= 1:
        return [one(t) for t in range(plan.trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(plan.trials), chunksize=256))


def error_samples(plan: TrialPlan, threads: int = 1) -> list:
    """``|value - exact_integral|`` per trial, ordered by trial index."""
    f = plan.resolve_function()
    exact = f.exact_integral
    return [abs(e.value - exact) for e in run_trials(plan, threads)]


def empirical_failure(plan: TrialPlan, threads: int = 1, level: float = CP_LEVEL) -> FailureStats:
    """Count trials with ``|value - exact| > epsilon`` and attach a Clopper-Pearson interval."""
    errors = error_samples(plan, threads)
    failures = sum(1 for e in errors if e > plan.epsilon)
    lo, hi = clopper_pearson(failures, plan.trials, level)
    return FailureStats(plan.trials, failures, failures / plan.trials, lo, hi)


def fit_rate(points) -> RateFit:
    """Least-squares line through ``(log n, log statistic)``."""
    points = tuple((int(n), float(s)) for n, s in points)
    if len(points) < 3:
        raise ParameterError("need >= 3 points to fit a rate")
    ns = np.array([p[0] for p in points], dtype=float)
    ss = np.array([p[1] for p in points])
    if np.any(ss <= 0) or not np.all(np.isfinite(ss)):
        raise ParameterError("statistics must be positive and finite")
    if np.any(np.diff(ns) <= 0):
        raise ParameterError("n must be strictly increasing")
    x, y = np.log(ns), np.log(ss)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), float(intercept), r2, points)


@dataclass(frozen=True)
class SweepRow:
    n: int
    statistic: float
    evals_mean: float
    epsilon: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None


def sweep(
    ns: Sequence[int],
    estimator_factory: Callable[[int], est.EstimatorKind],
    function: Union[TestFunction, str],
    reps: int,
    statistic: str = "median-abs-error",
    master_seed: int = 0,
    epsilon_of_n: Optional[Callable[[int], float]] = None,
    threads: int = 1,
) -> list:
    """One row per budget ``n``: the chosen error statistic over ``reps`` trials.

    Row ``i`` uses the trial streams ``RandomSource(master_seed, (i,)).child(t)``.
    ``failure-rate`` needs ``epsilon_of_n`` and also reports the
    Clopper-Pearson interval.
    """
    ns = [int(n) for n in ns]
    if not ns:
        raise ParameterError("ns must be non-empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ParameterError("ns must be increasing")
    if statistic not in STATISTICS:
        raise ParameterError(f"statistic must be one of {STATISTICS}")
    if statistic == "failure-rate" and epsilon_of_n is None:
        raise ParameterError("failure-rate needs epsilon_of_n")

    rows = []
    for i, n in enumerate(ns):
        eps = epsilon_of_n(n) if epsilon_of_n is not None else 1.0
        plan = TrialPlan(estimator_factory(n), function, eps, reps, master_seed, (i,))
        f = plan.resolve_function()
        estimates = run_trials(plan, threads)
        errors = np.array([abs(e.value - f.exact_integral) for e in estimates])
        evals_mean = float(np.mean([e.evals_used for e in estimates]))
        if statistic == "median-abs-error":
            rows.append(SweepRow(n, float(np.median(errors)), evals_mean))
        elif statistic == "rmse":
            rows.append(SweepRow(n, float(np.sqrt(np.mean(errors**2))), evals_mean))
        else:
            failures = int(np.sum(errors > eps))
            lo, hi = clopper_pearson(failures, reps)
            rows.append(SweepRow(n, failures / reps, evals_mean, eps, lo, hi))
    return rows
