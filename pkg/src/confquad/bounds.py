"""Closed-form error and failure bounds, and exact checks of the binomial tail lemmas.

Formulas return the raw expression even when it exceeds 1; callers cap at 1
when reading a value as a probability.

The binomial checks work with exact rationals ``numerator / 2**k``.
Irrational right-hand sides are enclosed with ``mpmath.iv`` interval
arithmetic and compared through the upper end of the enclosure, so a
``holds=True`` verdict is a certificate rather than a floating-point guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import mpmath

from .errors import ParameterError, RangeError

__all__ = [
    "GuaranteeSpec",
    "ExactProb",
    "hoeffding_failure_bound",
    "strat_holder_epsilon",
    "strat_w1p_epsilon",
    "median_failure_bound",
    "median_repetitions",
    "median_complexity_factor",
    "median_inner_epsilon",
    "median_complexity_upper",
    "lower_envelope_aux1",
    "lower_envelope_aux2",
    "rate_envelope",
    "lemma_a1_range",
    "lemma_a1_check",
    "lemma_a2_check",
    "bakhvalov_exact_uncertainty",
    "exceeds_third_power_of_quarter",
    "binomial_tail_lower",
]


@dataclass(frozen=True)
class GuaranteeSpec:
    """An ``(n, epsilon, delta)`` triple produced by a bound formula."""

    n: int
    epsilon: float
    delta: float
    source: str

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise ParameterError("delta must lie in (0, 1)")


@dataclass(frozen=True, order=False)
class ExactProb:
    """The dyadic rational ``numerator / 2**denominator_log2``."""

    numerator: int
    denominator_log2: int

    def __post_init__(self):
        if self.denominator_log2 < 0 or not 0 <= self.numerator <= 2**self.denominator_log2:
            raise ParameterError("ExactProb must lie in [0, 1]")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, 2**self.denominator_log2)

    def __float__(self):
        return float(self.fraction)

    def __str__(self):
        f = self.fraction
        return f"{f.numerator}/{f.denominator}"


class A1Result(NamedTuple):
    lhs: ExactProb
    rhs: float
    holds: bool


class A2Result(NamedTuple):
    lhs: ExactProb
    holds: bool


# -- upper bounds ----------------------------------------------------------------


def hoeffding_failure_bound(n: int, epsilon: float, spreads) -> float:
    """``2 exp(-2 n^2 eps^2 / sum b_i^2)`` for the mean of ``n`` bounded variables."""
    spreads = [float(b) for b in spreads]
    if not spreads:
        raise ParameterError("spreads must be non-empty")
    if n != len(spreads):
        raise ParameterError(f"n = {n} but {len(spreads)} spreads were given")
    if any(b <= 0 for b in spreads):
        raise ParameterError("spreads must be positive")
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    return 2.0 * math.exp(-2.0 * n * n * epsilon * epsilon / math.fsum(b * b for b in spreads))


def _check_delta(delta):
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta!r}")


def strat_holder_epsilon(m: int, d: int, beta: float, delta: float) -> GuaranteeSpec:
    """Error level at which stratified sampling with ``m**d`` points fails w.p. at most ``delta``
    on the Hölder unit ball: ``m**-(beta + d/2) * sqrt(log(2/delta) / 2)``."""
    if m < 1 or d < 1:
        raise ParameterError("m and d must be positive")
    if not 0 < beta <= 1:
        raise ParameterError("beta must lie in (0, 1]")
    _check_delta(delta)
    eps = m ** -(beta + d / 2) * math.sqrt(math.log(2.0 / delta)) / math.sqrt(2.0)
    return GuaranteeSpec(m**d, eps, delta, "stratified/holder")


def strat_w1p_epsilon(n: int, q: float, delta: float) -> GuaranteeSpec:
    """One-dimensional stratified sampling on the ``W^1_p`` unit ball, ``q = min(p, 2)``."""
    if n < 1:
        raise ParameterError("n must be positive")
    if not 1 < q <= 2:
        raise ParameterError("q must lie in (1, 2]")
    _check_delta(delta)
    eps = n ** -(2.0 - 1.0 / q) * math.sqrt(math.log(2.0 / delta)) / math.sqrt(2.0)
    return GuaranteeSpec(n, eps, delta, "stratified/W1p")


def median_failure_bound(alpha: float, k: int) -> tuple[float, float]:
    """Failure bound of the median of ``k`` runs that each fail w.p. at most ``alpha``.

    Returns ``(tight, loose) = (0.5 (4 a (1-a))**(k/2), 2**(k-1) a**(k/2))``.
    """
    if not 0 < alpha < 0.5:
        raise ParameterError("alpha must lie in (0, 1/2); the bound is vacuous otherwise")
    _check_odd(k)
    tight = 0.5 * (4.0 * alpha * (1.0 - alpha)) ** (k / 2)
    loose = 2.0 ** (k - 1) * alpha ** (k / 2)
    return tight, loose


def _check_odd(k):
    if not isinstance(k, int) or k < 1 or k % 2 == 0:
        raise ParameterError(f"k must be an odd positive integer, got {k!r}")


def _check_median_delta(delta):
    if not 0 < delta <= 0.5:
        raise ParameterError("delta must lie in (0, 1/2]")


def median_repetitions(delta: float) -> int:
    """Smallest odd ``k`` with ``k >= 2 log2(1/(2 delta))``."""
    _check_median_delta(delta)
    k = max(1, math.ceil(2.0 * math.log2(1.0 / (2.0 * delta))))
    return k if k % 2 else k + 1


def median_complexity_factor(delta: float) -> float:
    _check_median_delta(delta)
    return 2.0 * math.log2(1.0 / delta)


def median_inner_epsilon(epsilon: float, ell: float) -> float:
    """Accuracy demanded of the inner method so that Markov gives failure at most 1/8."""
    if ell < 1:
        raise ParameterError("ell must be >= 1")
    return 8.0 ** (-1.0 / ell) * epsilon


def median_complexity_upper(delta: float, epsilon: float, ell: float, n_mean: Callable[[float], int]) -> int:
    """Budget ``ceil(2 log2(1/delta)) * n_mean(8**(-1/ell) * epsilon)`` for an ``(eps, delta)`` method.

    ``n_mean`` maps an accuracy to the number of evaluations an ``ell``-mean
    method needs. The repetition count actually used is
    :func:`median_repetitions`, which never exceeds the factor.
    """
    if not epsilon > 0:
        raise ParameterError("epsilon must be positive")
    factor = median_complexity_factor(delta)
    return math.ceil(factor) * int(n_mean(median_inner_epsilon(epsilon, ell)))


# -- lower bounds ----------------------------------------------------------------


def lower_envelope_aux1(n: int, delta: float, gamma: float) -> float:
    """``gamma * min(sqrt(n log4(1/(3 delta))), n)``, valid for ``n >= 17``, ``delta < 1/3``."""
    if n < 17 or not 0 < delta < 1 / 3:
        raise RangeError("the envelope is stated for n >= 17 and 0 < delta < 1/3")
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    log4 = math.log(1.0 / (3.0 * delta)) / math.log(4.0)
    return gamma * min(math.sqrt(n * log4), n)


def lower_envelope_aux2(gamma: float, M: int) -> tuple[float, float]:
    """``(gamma M / 2, 2**-ceil(M/2) / 2)``: error level and the uncertainty below which it binds."""
    if not gamma > 0:
        raise ParameterError("gamma must be positive")
    if M < 1:
        raise ParameterError("M must be positive")
    return 0.5 * gamma * M, 0.5 * 2.0 ** -math.ceil(M / 2)


def rate_envelope(n: int, delta: float, r: int, d: int, p: float) -> float:
    """Shape ``n**(-r/d) * min(1, (log(1/delta)/n)**(1 - 1/q))`` with ``q = min(p, 2)``."""
    if n < 2:
        raise ParameterError("n must be >= 2")
    _check_delta(delta)
    if not p >= 1:
        raise ParameterError("p must be >= 1")
    q = min(p, 2.0)
    return n ** (-r / d) * min(1.0, (math.log(1.0 / delta) / n) ** (1.0 - 1.0 / q))


# -- exact binomial lemmas -------------------------------------------------------


def binomial_tail_lower(k: int, upto: int) -> int:
    """``sum_{j=0}^{upto} C(k, j)`` as an exact integer (empty sum when ``upto < 0``)."""
    return sum(math.comb(k, j) for j in range(0, min(upto, k) + 1))


def lemma_a1_range(k: int) -> int:
    """Largest admissible ``t`` for the binomial tail lemma at this ``k``."""
    return (k + 3) // 8 if k % 2 else (k + 6) // 8


_IV_DPS = 50


def _a1_rhs_upper(k: int, t: int) -> Fraction:
    iv = mpmath.iv
    prev = iv.dps
    iv.dps = _IV_DPS
    try:
        tt = iv.mpf(t) if k % 2 else iv.mpf(t) - iv.mpf(1) / 2
        prefactor = 1 / (2 + 4 / iv.sqrt(iv.pi))
        enclosure = prefactor * iv.exp(-16 * iv.log(2) * tt * tt / k)
    finally:
        iv.dps = prev
    sign, man, exp, _ = enclosure._mpi_[1]
    value = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -value if sign else value


def lemma_a1_check(k: int, t: int) -> A1Result:
    """Check ``2^-k sum_{j <= k//2 - t} C(k, j) >= exp(-16 log2 t'^2 / k) / (2 + 4/sqrt(pi))``.

    ``t' = t`` for odd ``k`` and ``t - 1/2`` for even ``k``. The right-hand
    side is enclosed by interval arithmetic; ``rhs`` is the upper end of the
    enclosure (rounded up to float) and ``holds`` compares that upper end
    exactly against the rational left-hand side.
    """
    if k < 1 or t < 0:
        raise ParameterError("k must be positive and t non-negative")
    if t > lemma_a1_range(k):
        raise RangeError(f"t = {t} outside the stated range for k = {k}")
    lhs = ExactProb(binomial_tail_lower(k, k // 2 - t), k)
    upper = _a1_rhs_upper(k, t)
    rhs = float(upper)
    if Fraction(rhs) < upper:
        rhs = math.nextafter(rhs, math.inf)
    return A1Result(lhs, rhs, lhs.fraction >= upper)


def lemma_a2_check(k: int, k_prime: int) -> A2Result:
    """Check ``2^-k [sum_{j <= (k-k')/2} C(k,j) + sum_{j >= (k+k'+1)/2} C(k,j)] >= 2^-k'`` exactly."""
    if k_prime < 0 or k < k_prime:
        raise ParameterError("requires 0 <= k' <= k")
    low = binomial_tail_lower(k, (k - k_prime) // 2)
    start = -(-(k + k_prime + 1) // 2)
    high = sum(math.comb(k, j) for j in range(start, k + 1))
    lhs = ExactProb(low + high, k)
    # lhs >= 2^-k'  <=>  (low + high) * 2^k' >= 2^k
    return A2Result(lhs, (low + high) << k_prime >= 1 << k)


def bakhvalov_exact_uncertainty(k: int, eps_over_gamma) -> ExactProb:
    """``inf_a P(|X_k - a| > e)`` for ``X_k`` a sum of ``k`` Rademacher signs.

    ``X_k = 2j - k`` with ``j ~ Bin(k, 1/2)``. The values within distance
    ``e`` of any centre form a run of at most ``floor(e) + 1`` consecutive
    ``j``; every run start is tried and the heaviest one removed.
    """
    if k < 1:
        raise ParameterError("k must be positive")
    if eps_over_gamma < 0:
        raise ParameterError("eps_over_gamma must be non-negative")
    width = min(math.floor(eps_over_gamma) + 1, k + 1)
    weights = [math.comb(k, j) for j in range(k + 1)]
    window = sum(weights[:width])
    best = window
    for start in range(1, k + 2 - width):
        window += weights[start + width - 1] - weights[start - 1]
        best = max(best, window)
    return ExactProb(2**k - best, k)


def exceeds_third_power_of_quarter(prob: ExactProb, exponent: Fraction) -> bool:
    """Exact test of ``prob > (1/3) * 4**(-exponent)`` for rational ``exponent = a/b >= 0``.

    Equivalent to ``(3 N)**b * 4**a > 2**(K b)`` with ``prob = N / 2**K``.
    """
    exponent = Fraction(exponent)
    if exponent < 0:
        raise ParameterError("exponent must be non-negative")
    a, b = exponent.numerator, exponent.denominator
    return (3 * prob.numerator) ** b << (2 * a) > 1 << (prob.denominator_log2 * b)
