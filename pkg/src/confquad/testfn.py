"""Test functions on the unit cube with exact integrals and certified norm bounds.

Every factory returns a :class:`TestFunction`: a vectorised integrand on
``[0, 1]^d`` together with its closed-form integral, the smoothness class it
is meant to live in, and an upper bound on its (semi)norm in that class.
Estimator errors can then be measured against ground truth, and the signed
bump sums used for lower bounds can be checked to lie in the unit ball.

Cells of an ``m``-per-axis partition are half-open, ``[i/m, (i+1)/m)``,
with the last cell closed at 1 so that every point of the cube belongs to
exactly one cell.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConstructionError, ParameterError

__all__ = [
    "SmoothnessClass",
    "TestFunction",
    "FoolingSpec",
    "holder",
    "sobolev",
    "lebesgue",
    "cell_index",
    "make_holder_bump",
    "make_sobolev_poly_bump",
    "make_fooling_sum",
    "make_frolov_counterexample",
    "make_constant",
    "make_affine",
    "poly_bump_norm",
    "NORM_GRID",
    "NORM_INFLATION",
]

# Grid resolution per axis and safety factor used when certifying Sobolev norms.
NORM_GRID = 4096
NORM_INFLATION = 1.1


@dataclass(frozen=True)
class SmoothnessClass:
    """Function class descriptor: Hölder ``C^beta``, Sobolev ``W_p^r`` or ``L_p``."""

    kind: str
    d: int
    beta: Optional[float] = None
    r: Optional[int] = None
    p: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or self.d < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.d!r}")
        if self.kind == "holder":
            if self.beta is None or not 0 < self.beta <= 1:
                raise ParameterError(f"Hölder exponent must lie in (0, 1], got {self.beta!r}")
        elif self.kind == "sobolev":
            if not isinstance(self.r, (int, np.integer)) or self.r < 1:
                raise ParameterError(f"smoothness r must be a positive integer, got {self.r!r}")
            _check_p(self.p)
        elif self.kind == "lp":
            _check_p(self.p)
        else:
            raise ParameterError(f"unknown smoothness kind {self.kind!r}")

    @property
    def q(self) -> float:
        """``min(p, 2)``; Hölder classes count as ``p = inf``."""
        p = math.inf if self.kind == "holder" else self.p
        return min(p, 2.0)

    @property
    def smoothness(self) -> float:
        if self.kind == "holder":
            return float(self.beta)
        if self.kind == "sobolev":
            return float(self.r)
        return 0.0


def _check_p(p):
    if p is None or not (p >= 1):
        raise ParameterError(f"integrability p must lie in [1, inf], got {p!r}")


def holder(beta: float, d: int = 1) -> SmoothnessClass:
    return SmoothnessClass("holder", d, beta=beta)


def sobolev(r: int, p: float, d: int = 1) -> SmoothnessClass:
    return SmoothnessClass("sobolev", d, r=r, p=float(p))


def lebesgue(p: float, d: int = 1) -> SmoothnessClass:
    return SmoothnessClass("lp", d, p=float(p))


def _as_points(x, d: int):
    """Coerce ``x`` to an ``(N, d)`` array; also return the output shape."""
    x = np.asarray(x, dtype=float)
    if d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        return x.reshape(-1, 1), x.shape
    if x.shape[-1] != d:
        raise ParameterError(f"expected points with last axis of length {d}, got shape {x.shape}")
    return x.reshape(-1, d), x.shape[:-1]


def _inside(pts):
    return np.all((pts >= 0.0) & (pts <= 1.0), axis=1)


def cell_index(x, m: int):
    """Index of the half-open cell of the ``m``-per-axis grid containing each point.

    Returns an integer array of shape ``(N, d)``; the point ``1`` is assigned
    to the last cell.
    """
    x = np.asarray(x, dtype=float)
    return np.clip(np.floor(x * m).astype(np.int64), 0, m - 1)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """An integrand on ``[0, 1]^d`` with known integral.

    ``func`` receives an ``(N, d)`` array of points inside the cube and
    returns ``N`` values; :meth:`__call__` adds shape handling and returns 0
    outside the cube.
    """

    __test__ = False  # not a pytest test class

    d: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    exact_integral: float
    cls: SmoothnessClass
    norm_bound: float
    support_note: str = ""
    bump_integral: Optional[float] = None
    name: str = ""

    def __call__(self, x):
        pts, shape = _as_points(x, self.d)
        out = np.zeros(len(pts))
        inside = _inside(pts)
        if inside.all():
            out = np.asarray(self.func(pts), dtype=float)
        elif inside.any():
            out[inside] = self.func(pts[inside])
        return out.reshape(shape) if shape else float(out[0])

    eval = __call__


# -- bumps -----------------------------------------------------------------


def make_holder_bump(beta: float, d: int = 1) -> TestFunction:
    """Hölder hat ``c * prod_j min(x_j, 1 - x_j)**beta``.

    The constant ``c = 2**(beta*(d-1)) / d`` keeps the ``C^beta`` seminorm
    (sup-norm metric) at most 1: each factor is ``beta``-Hölder with
    constant 1 and bounded by ``2**-beta``.
    """
    cls = holder(beta, d)
    c = 2.0 ** (beta * (d - 1)) / d
    one_axis = 0.5**beta / (beta + 1.0)

    def func(pts):
        return c * np.prod(np.minimum(pts, 1.0 - pts) ** beta, axis=1)

    return TestFunction(
        d=d,
        func=func,
        exact_integral=c * one_axis**d,
        cls=cls,
        norm_bound=1.0,
        support_note="[0,1]^d, vanishing on the boundary",
        name=f"holder(beta={beta:g},d={d})",
    )


def _poly_factor(r: int) -> Polynomial:
    return Polynomial([0.0, 1.0, -1.0]) ** r


def _lp_norm_1d(values: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    return float(np.mean(np.abs(values) ** p) ** (1.0 / p))


def poly_bump_norm(r: int, p: float, d: int, grid: int = NORM_GRID) -> float:
    """Grid estimate of ``||prod_j (x_j(1-x_j))**r||`` in ``W_p^r([0,1]^d)``.

    Derivatives are exact polynomial derivatives. The integrand factorises, so
    every ``||D^alpha phi||_p`` is a product of one-dimensional norms,
    evaluated on ``grid`` midpoints (``p < inf``) or ``grid + 1`` nodes
    including the endpoints (``p = inf``).
    """
    g = _poly_factor(r)
    if math.isinf(p):
        xs = np.linspace(0.0, 1.0, grid + 1)
    else:
        xs = (np.arange(grid) + 0.5) / grid
    axis_norms = [_lp_norm_1d(g.deriv(a)(xs) if a else g(xs), p) for a in range(r + 1)]
    terms = []
    for alpha in itertools.product(range(r + 1), repeat=d):
        if sum(alpha) <= r:
            terms.append(math.prod(axis_norms[a] for a in alpha))
    terms = np.asarray(terms)
    if math.isinf(p):
        return float(terms.max())
    return float(np.sum(terms**p) ** (1.0 / p))


def make_sobolev_poly_bump(r: int, p: float, d: int = 1) -> TestFunction:
    """Polynomial bump ``c * prod_j (x_j (1 - x_j))**r`` in the unit ball of ``W_p^r``.

    ``c`` is the reciprocal of the grid-estimated norm inflated by
    :data:`NORM_INFLATION`, so ``norm_bound`` (that inflated estimate times
    ``c``) equals 1. ``exact_integral`` uses ``B(r+1, r+1) = (r!)^2/(2r+1)!``
    per axis and is also exposed as ``bump_integral``.
    """
    cls = sobolev(r, p, d)
    raw = poly_bump_norm(r, cls.p, d)
    c = 1.0 / (NORM_INFLATION * raw)
    beta_rr = math.factorial(r) ** 2 / math.factorial(2 * r + 1)
    integral = c * beta_rr**d

    def func(pts):
        return c * np.prod((pts * (1.0 - pts)) ** r, axis=1)

    return TestFunction(
        d=d,
        func=func,
        exact_integral=integral,
        cls=cls,
        norm_bound=c * NORM_INFLATION * raw,
        support_note="[0,1]^d, vanishing on the boundary with r-1 derivatives",
        bump_integral=integral,
        name=f"sobolev(r={r},p={cls.p:g},d={d})",
    )


# -- signed bump sums ------------------------------------------------------


def _fooling_scale(cls: SmoothnessClass, m: int, n_cells: int, n_active: int) -> float:
    if cls.kind == "holder":
        return 0.5 * m ** (-cls.beta)
    if cls.kind == "sobolev":
        if cls.p >= 2:
            return float(m) ** (-cls.r)
        return float(m) ** (-cls.r) * (n_cells / n_active) ** (1.0 / cls.p)
    raise ConstructionError(f"no bump scaling rule for class kind {cls.kind!r}")


@dataclass(frozen=True)
class FoolingSpec:
    """Which cells of an ``m``-per-axis grid carry a bump, with which sign and scale."""

    m: int
    cells: tuple
    signs: tuple
    scale: float

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError("m must be positive")
        if len(self.cells) != len(self.signs):
            raise ParameterError("signs must be given for exactly the chosen cells")
        if len(set(self.cells)) != len(self.cells):
            raise ParameterError("cells must be distinct")
        if any(s not in (1, -1) for s in self.signs):
            raise ParameterError("signs must be +1 or -1")
        if not self.cells:
            raise ParameterError("at least one cell is required")

    @property
    def M(self) -> int:
        return len(self.cells)

    @classmethod
    def for_class(cls, smoothness: SmoothnessClass, m: int, cells=None, signs=None) -> "FoolingSpec":
        """Build a spec with the unit-ball scale for ``smoothness``.

        ``cells`` defaults to all ``m**d`` cells; ``signs`` defaults to all +1.
        """
        d = smoothness.d
        if cells is None:
            cells = list(itertools.product(range(m), repeat=d))
        cells = tuple(tuple(int(i) for i in c) for c in cells)
        for c in cells:
            if len(c) != d or any(not 0 <= i < m for i in c):
                raise ParameterError(f"cell {c} is not in [{m}]^{d}")
        if signs is None:
            signs = (1,) * len(cells)
        scale = _fooling_scale(smoothness, m, m**d, len(cells))
        return cls(m=m, cells=cells, signs=tuple(int(s) for s in signs), scale=scale)


def make_fooling_sum(bump: TestFunction, spec: FoolingSpec, cls: SmoothnessClass) -> TestFunction:
    """Signed sum ``sum_i s_i * scale * bump(m x - i)`` over the cells in ``spec``.

    Bumps have pairwise disjoint supports, each with integral
    ``scale * m**-d * bump.exact_integral``.
    """
    if bump.cls != cls:
        raise ConstructionError(f"bump lives in {bump.cls}, not in {cls}")
    d, m = cls.d, spec.m
    expected = _fooling_scale(cls, m, m**d, spec.M)
    if not math.isclose(spec.scale, expected, rel_tol=1e-12):
        raise ConstructionError(f"scale {spec.scale} inconsistent with class (expected {expected})")

    sign_grid = np.zeros((m,) * d)
    for c, s in zip(spec.cells, spec.signs):
        sign_grid[c] = s
    scale = spec.scale
    gamma = scale * m ** (-d) * bump.exact_integral

    def func(pts):
        cell = cell_index(pts, m)
        local = m * pts - cell
        signs = sign_grid[tuple(cell.T)]
        out = np.zeros(len(pts))
        hit = signs != 0
        if hit.any():
            out[hit] = signs[hit] * scale * bump.func(local[hit])
        return out

    if cls.kind == "holder":
        # Bumps vanish on cell faces, so cross-cell differences cost a factor 2.
        norm = 2.0 * scale * m**cls.beta * bump.norm_bound
    else:
        inv_p = 0.0 if math.isinf(cls.p) else 1.0 / cls.p
        norm = scale * m ** (cls.r - d * inv_p) * spec.M**inv_p * bump.norm_bound

    return TestFunction(
        d=d,
        func=func,
        exact_integral=gamma * sum(spec.signs),
        cls=cls,
        norm_bound=norm,
        support_note=f"{spec.M} of {m**d} cells of the {m}-per-axis grid",
        bump_integral=gamma,
        name=f"fooling(m={m},M={spec.M})",
    )


def make_frolov_counterexample(n: int, r: int) -> TestFunction:
    """``(2n)**-r * sum_{k<n} phi(2n x - 2k)`` for the 1-D polynomial bump ``phi``.

    The function vanishes on every ``[(2k+1)/(2n), (k+1)/n]``.
    """
    if n < 1 or r < 1:
        raise ParameterError("n and r must be positive integers")
    cls = sobolev(r, 2.0, 1)
    bump = make_sobolev_poly_bump(r, 2.0, 1)
    spec = FoolingSpec(
        m=2 * n,
        cells=tuple((2 * k,) for k in range(n)),
        signs=(1,) * n,
        scale=float(2 * n) ** (-r),
    )
    f = make_fooling_sum(bump, spec, cls)
    return replace(
        f,
        support_note=f"bumps on [k/n, (2k+1)/(2n)], zero on [(2k+1)/(2n), (k+1)/n], k < {n}",
        name=f"frolov(n={n},r={r})",
    )


# -- degenerate integrands -------------------------------------------------


def make_constant(value: float, d: int = 1) -> TestFunction:
    value = float(value)
    return TestFunction(
        d=d,
        func=lambda pts: np.full(len(pts), value),
        exact_integral=value,
        cls=lebesgue(math.inf, d),
        norm_bound=abs(value),
        support_note="[0,1]^d",
        name=f"const({value:g})",
    )


def make_affine(coeffs: Sequence[float], offset: float = 0.0) -> TestFunction:
    """``offset + sum_j coeffs[j] * x_j``; reproduced exactly by multilinear interpolation."""
    a = np.asarray(coeffs, dtype=float).reshape(-1)
    offset = float(offset)
    return TestFunction(
        d=len(a),
        func=lambda pts: offset + pts @ a,
        exact_integral=offset + 0.5 * float(a.sum()),
        cls=lebesgue(math.inf, len(a)),
        norm_bound=abs(offset) + float(np.abs(a).sum()),
        support_note="[0,1]^d",
        name="affine",
    )
