"""Randomized quadrature on the unit cube with explicit (epsilon, delta) guarantees.

Estimators, test integrands, guarantee formulas, exact lemma checks and a
repeated-trial harness for measuring failure rates and convergence rates.
"""

from . import bounds, estimators, harness, testfn
from .bounds import (
    GuaranteeSpec,
    median_failure_bound,
    median_repetitions,
    strat_holder_epsilon,
    strat_w1p_epsilon,
)
from .descriptors import parse_function
from .errors import (
    BudgetError,
    ConstructionError,
    ParameterError,
    RangeError,
    UnsupportedDimensionError,
)
from .estimators import (
    ControlVariate,
    Estimate,
    FailureInjector,
    Frolov1D,
    Median,
    PlainMC,
    RandomSource,
    Stratified,
    run,
)
from .harness import TrialPlan, clopper_pearson, empirical_failure, fit_rate, sweep
from .testfn import SmoothnessClass, TestFunction

__version__ = "0.1.0"
