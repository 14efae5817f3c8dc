"""Randomized integration rules on the unit cube.

All rules are pure functions of ``(f, parameters, rng)``. Randomness comes
from :class:`RandomSource`, a seed plus a spawn key fed through numpy's
``SeedSequence`` into a ``PCG64`` bit generator, so results are reproducible
across platforms and independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import BudgetError, ParameterError, UnsupportedDimensionError
from .testfn import TestFunction

__all__ = [
    "RandomSource",
    "Estimate",
    "PlainMC",
    "Stratified",
    "Median",
    "ControlVariate",
    "Frolov1D",
    "FailureInjector",
    "EstimatorKind",
    "plain_mc",
    "stratified",
    "median_amplify",
    "control_variate",
    "frolov_1d",
    "inject_failure",
    "run",
    "multilinear_interpolant",
    "DEFAULT_BUDGET",
    "MAX_GRID_DIM",
]

DEFAULT_BUDGET = 10**8
MAX_GRID_DIM = 3


@dataclass(frozen=True)
class RandomSource:
    """Deterministic source of uniforms on ``[0, 1)``.

    ``child(i)`` appends ``i`` to the spawn key; children of one parent are
    statistically independent streams.
    """

    seed: int
    spawn_key: tuple = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")

    def child(self, index: int) -> "RandomSource":
        return RandomSource(self.seed, self.spawn_key + (int(index),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.spawn_key)
        return np.random.Generator(np.random.PCG64(ss))

    def uniform(self, size) -> np.ndarray:
        return self.generator().random(size)


@dataclass(frozen=True)
class Estimate:
    value: float
    evals_used: int


# -- estimator descriptors ---------------------------------------------------


def _positive(name, value):
    if not isinstance(value, (int, np.integer)) or value < 1:
        raise ParameterError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class PlainMC:
    n: int

    def __post_init__(self):
        _positive("n", self.n)


@dataclass(frozen=True)
class Stratified:
    m: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        _positive("m", self.m)


@dataclass(frozen=True)
class Median:
    k: int
    inner: "EstimatorKind"

    def __post_init__(self):
        _check_odd(self.k)


@dataclass(frozen=True)
class ControlVariate:
    m_grid: int
    n_mc: int
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        _positive("m_grid", self.m_grid)
        _positive("n_mc", self.n_mc)


@dataclass(frozen=True)
class Frolov1D:
    n: int

    def __post_init__(self):
        _positive("n", self.n)


@dataclass(frozen=True)
class FailureInjector:
    """Synthetic estimator that misses the integral by ``miss`` with probability ``alpha``.

    Uses the exact integral of ``f`` and no function values; exists to test
    amplification and failure accounting against known failure laws.
    """

    alpha: float
    miss: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError("alpha must lie in [0, 1]")


EstimatorKind = Union[PlainMC, Stratified, Median, ControlVariate, Frolov1D, FailureInjector]


def _check_odd(k):
    if not isinstance(k, (int, np.integer)) or k < 1 or k % 2 == 0:
        raise ParameterError(f"k must be odd and >= 1, got {k!r}")


# -- rules ---------------------------------------------------------------------


def _mean(y: np.ndarray) -> float:
    # centring on the first value makes constant samples average exactly
    y = np.asarray(y, dtype=float).ravel()
    return float(y[0] + np.mean(y - y[0]))


def plain_mc(f: TestFunction, n: int, rng: RandomSource) -> Estimate:
    """Mean of ``f`` at ``n`` i.i.d. uniform points of the cube."""
    _positive("n", n)
    x = rng.generator().random((n, f.d))
    return Estimate(_mean(f(x)), n)


def _cell_points(m: int, d: int, u: np.ndarray) -> np.ndarray:
    idx = np.indices((m,) * d).reshape(d, -1).T
    x = (idx + u) / m
    # keep rounding from pushing a point onto the next cell's lower face
    return np.minimum(x, np.nextafter((idx + 1) / m, 0.0))


def stratified(f: TestFunction, m: int, rng: RandomSource, budget: int = DEFAULT_BUDGET) -> Estimate:
    """One uniform point in each of the ``m**d`` half-open cells, equally weighted."""
    _positive("m", m)
    n = m**f.d
    if n > budget:
        raise BudgetError(f"m**d = {n} exceeds the evaluation budget {budget}")
    u = rng.generator().random((n, f.d))
    x = _cell_points(m, f.d, u)
    return Estimate(_mean(f(x)), n)


def inject_failure(f: TestFunction, alpha: float, rng: RandomSource, miss: float = 1.0) -> Estimate:
    fail = rng.generator().random() < alpha
    return Estimate(f.exact_integral + (miss if fail else 0.0), 0)


InnerRule = Union[EstimatorKind, Callable[[TestFunction, RandomSource], Estimate]]


def median_amplify(inner: InnerRule, k: int, f: TestFunction, rng: RandomSource) -> Estimate:
    """Median of ``k`` independent runs of ``inner`` on streams ``rng.child(j)``.

    ``inner`` is an estimator descriptor or any callable ``(f, rng) -> Estimate``.
    """
    _check_odd(k)
    runs = [_call(inner, f, rng.child(j)) for j in range(k)]
    value = float(np.median([e.value for e in runs]))
    return Estimate(value, sum(e.evals_used for e in runs))


def multilinear_interpolant(f: TestFunction, m_grid: int):
    """Piecewise ``d``-linear interpolant of ``f`` on the ``(m_grid+1)^d`` tensor grid.

    Returns ``(g, integral, n_nodes)`` where ``g`` evaluates the interpolant
    on an ``(N, d)`` array and ``integral`` is its exact integral (tensor
    trapezoidal rule).
    """
    d, m = f.d, m_grid
    nodes = np.linspace(0.0, 1.0, m + 1)
    mesh = np.stack(np.meshgrid(*([nodes] * d), indexing="ij"), axis=-1).reshape(-1, d)
    values = f(mesh).reshape((m + 1,) * d)

    cell_means = values
    for axis in range(d):
        lo = np.take(cell_means, np.arange(m), axis=axis)
        hi = np.take(cell_means, np.arange(1, m + 1), axis=axis)
        cell_means = 0.5 * (lo + hi)
    ref = cell_means.flat[0]
    integral = float(ref + np.mean(cell_means - ref))

    def g(x):
        x = np.asarray(x, dtype=float).reshape(-1, d)
        cell = np.clip(np.floor(x * m).astype(np.int64), 0, m - 1)
        t = x * m - cell
        offsets = np.indices((2,) * d).reshape(d, -1).T
        corners = values[tuple((cell[:, None, :] + offsets[None, :, :]).transpose(2, 0, 1))]
        corners = corners.reshape((len(x),) + (2,) * d)
        # Collapse the last axis each time: f0 + t * (f1 - f0) reproduces constants exactly.
        for axis in reversed(range(d)):
            tt = t[:, axis].reshape((-1,) + (1,) * (corners.ndim - 2))
            corners = corners[..., 0] + tt * (corners[..., 1] - corners[..., 0])
        return corners

    return g, integral, mesh.shape[0]


def control_variate(
    f: TestFunction, m_grid: int, n_mc: int, rng: RandomSource, budget: int = DEFAULT_BUDGET
) -> Estimate:
    """Integrate a multilinear interpolant exactly, plain MC on the residual."""
    _positive("m_grid", m_grid)
    _positive("n_mc", n_mc)
    if f.d > MAX_GRID_DIM:
        raise BudgetError(f"tensor grid interpolation is limited to d <= {MAX_GRID_DIM}")
    n_nodes = (m_grid + 1) ** f.d
    if n_nodes + n_mc > budget:
        raise BudgetError(f"{n_nodes} grid nodes + {n_mc} samples exceed the budget {budget}")
    g, int_g, n_nodes = multilinear_interpolant(f, m_grid)
    x = rng.generator().random((n_mc, f.d))
    residual = f(x).reshape(n_mc) - g(x)
    return Estimate(int_g + float(np.mean(residual)), n_nodes + n_mc)


def frolov_1d(
    f: TestFunction, n: int, rng: RandomSource, u: Optional[float] = None, v: Optional[float] = None
) -> Estimate:
    """Randomly dilated and shifted lattice rule ``(1/(un)) sum_m f((m+v)/(un))``.

    ``u ~ U[1/2, 3/2]`` and ``v ~ U[0, 1]`` unless forced. Only nodes inside
    ``[0, 1]`` (endpoints included) are evaluated.
    """
    if f.d != 1:
        raise UnsupportedDimensionError("the randomized Frolov rule is implemented for d = 1 only")
    _positive("n", n)
    if u is None or v is None:
        draw = rng.generator().random(2)
        u = 0.5 + draw[0] if u is None else u
        v = draw[1] if v is None else v
    h = u * n
    lo = math.ceil(-v)
    hi = math.floor(h - v)
    ms = np.arange(lo, hi + 1)
    x = (ms + v) / h
    x = x[(x >= 0.0) & (x <= 1.0)]
    if len(x) == 0:
        return Estimate(0.0, 0)
    return Estimate(float(np.sum(f(x.reshape(-1, 1)))) / h, len(x))


def _call(inner: InnerRule, f: TestFunction, rng: RandomSource) -> Estimate:
    if callable(inner) and not isinstance(inner, _KINDS):
        return inner(f, rng)
    return run(inner, f, rng)


_KINDS = (PlainMC, Stratified, Median, ControlVariate, Frolov1D, FailureInjector)


def run(kind: EstimatorKind, f: TestFunction, rng: RandomSource) -> Estimate:
    """Dispatch an estimator descriptor."""
    if isinstance(kind, PlainMC):
        return plain_mc(f, kind.n, rng)
    if isinstance(kind, Stratified):
        return stratified(f, kind.m, rng, kind.budget)
    if isinstance(kind, Median):
        return median_amplify(kind.inner, kind.k, f, rng)
    if isinstance(kind, ControlVariate):
        return control_variate(f, kind.m_grid, kind.n_mc, rng, kind.budget)
    if isinstance(kind, Frolov1D):
        return frolov_1d(f, kind.n, rng)
    if isinstance(kind, FailureInjector):
        return inject_failure(f, kind.alpha, rng, kind.miss)
    raise ParameterError(f"unknown estimator kind {kind!r}")
