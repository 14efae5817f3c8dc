import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.interpolate import RegularGridInterpolator

from confquad import estimators as est
from confquad.descriptors import parse_function
from confquad.errors import BudgetError, ParameterError, UnsupportedDimensionError
from confquad.estimators import (
    ControlVariate,
    Estimate,
    FailureInjector,
    Frolov1D,
    Median,
    PlainMC,
    RandomSource,
    Stratified,
)
from confquad.harness import TrialPlan, run_trials
from confquad.testfn import (
    make_affine,
    make_constant,
    make_frolov_counterexample,
    make_holder_bump,
    make_sobolev_poly_bump,
)

GOLDEN = json.loads((Path(__file__).parent / "golden.json").read_text())


# -- random source ---------------------------------------------------------------


def test_random_source_reproducible_and_distinct():
    a = RandomSource(7).uniform(5)
    assert np.array_equal(a, RandomSource(7).uniform(5))
    assert not np.array_equal(a, RandomSource(8).uniform(5))
    assert not np.array_equal(RandomSource(7).child(0).uniform(5), RandomSource(7).child(1).uniform(5))
    assert RandomSource(7).child(3).child(2) == RandomSource(7, (3, 2))


def test_random_source_matches_documented_generator():
    # PCG64 seeded through SeedSequence, the same path as numpy's default_rng
    assert np.array_equal(RandomSource(99).uniform(8), np.random.default_rng(99).random(8))


def test_random_source_rejects_bad_seed():
    with pytest.raises(ParameterError):
        RandomSource(-1)
    with pytest.raises(ParameterError):
        RandomSource(2**64)


def test_children_look_independent():
    # correlation of sibling streams is at noise level
    xs = np.array([RandomSource(1).child(t).uniform(2) for t in range(20000)])
    assert abs(np.corrcoef(xs[:, 0], xs[:, 1])[0, 1]) < 4 / math.sqrt(20000)
    assert abs(np.corrcoef(xs[:-1, 0], xs[1:, 0])[0, 1]) < 4 / math.sqrt(20000)


# -- plain Monte Carlo -------------------------------------------------------------


def test_plain_constant_exact():
    for c in (0.1, 0.3, -2.7):
        f = make_constant(c, 2)
        for n in (1, 3, 7, 1000):
            assert est.plain_mc(f, n, RandomSource(n)).value == c


def test_plain_golden_replay():
    g = GOLDEN["plain_mc"]
    f = parse_function(g["function"])
    value = est.plain_mc(f, g["n"], RandomSource(g["seed"])).value
    assert value == g["value"]
    # independent replay of the documented generator
    assert value == pytest.approx(np.random.default_rng(g["seed"]).random(g["n"]).mean(), rel=1e-15)


def test_plain_rejects_zero():
    with pytest.raises(ParameterError):
        est.plain_mc(make_constant(1.0), 0, RandomSource(0))
    with pytest.raises(ParameterError):
        PlainMC(0)


def test_plain_unbiased_on_holder_bump():
    f = make_holder_bump(1.0, 1)
    vals = np.array([e.value for e in run_trials(TrialPlan(PlainMC(16), f, 1.0, 20000, 4))])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    assert abs(vals.mean() - f.exact_integral) <= 3.5 * se


# -- stratified ------------------------------------------------------------------------


def test_stratified_constant_exact():
    f = make_constant(0.3, 2)
    for m in (1, 4, 7):
        assert est.stratified(f, m, RandomSource(m)).value == 0.3


def test_stratified_m1_equals_plain_n1():
    f = make_holder_bump(0.5, 2)
    for seed in range(50):
        rng = RandomSource(seed)
        assert est.stratified(f, 1, rng).value == est.plain_mc(f, 1, rng).value


def test_stratified_points_in_their_cells():
    m, d = 5, 2
    u = np.nextafter(np.ones((m**d, d)), 0.0)  # largest uniforms in [0, 1)
    x = est._cell_points(m, d, u)
    idx = np.indices((m,) * d).reshape(d, -1).T
    assert np.all(np.floor(x * m) == idx)


def test_stratified_holder_deterministic_cap():
    f = make_holder_bump(1.0, 1)
    m = 256
    worst = max(abs(est.stratified(f, m, RandomSource(s)).value - f.exact_integral) for s in range(10000))
    assert worst <= f.norm_bound * m**-1.0


@pytest.mark.parametrize("beta,d,m", [(0.5, 1, 64), (1.0, 2, 16), (0.3, 2, 8)])
def test_stratified_holder_cap_other_classes(beta, d, m):
    f = make_holder_bump(beta, d)
    for s in range(500):
        err = abs(est.stratified(f, m, RandomSource(s)).value - f.exact_integral)
        assert err <= f.norm_bound * m**-beta


def test_stratified_budget_guard():
    f = make_holder_bump(1.0, 2)
    with pytest.raises(BudgetError):
        est.run(Stratified(10, budget=50), f, RandomSource(0))


# -- median amplification -----------------------------------------------------------


def test_median_forced_values():
    forced = [0.1, 0.9, 0.4]

    def inner(f, rng):
        return Estimate(forced[rng.spawn_key[-1]], 2)

    e = est.median_amplify(inner, 3, make_constant(0.0), RandomSource(0))
    assert e.value == 0.4
    assert e.evals_used == 6


def test_median_k1_is_one_inner_run():
    f = make_holder_bump(1.0, 1)
    rng = RandomSource(11)
    assert est.median_amplify(PlainMC(10), 1, f, rng) == est.plain_mc(f, 10, rng.child(0))


@pytest.mark.parametrize("k", [0, 2, 4, -1])
def test_median_even_k_rejected(k):
    with pytest.raises(ParameterError):
        est.median_amplify(PlainMC(1), k, make_constant(0.0), RandomSource(0))
    with pytest.raises(ParameterError):
        Median(k, PlainMC(1))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), k=st.sampled_from([1, 3, 5, 7, 9]), alpha=st.floats(0.05, 0.6))
def test_median_fails_only_with_majority_failing(seed, k, alpha):
    f = make_constant(0.0)
    eps = 0.5
    inner_errors = []

    def inner(g, rng):
        e = est.inject_failure(g, alpha, rng)
        inner_errors.append(abs(e.value - g.exact_integral))
        return e

    e = est.median_amplify(inner, k, f, RandomSource(seed))
    composed_fail = abs(e.value - f.exact_integral) > eps
    n_fail = sum(err > eps for err in inner_errors)
    assert composed_fail == (n_fail >= (k + 1) // 2)


def test_injector_is_exact_otherwise():
    f = make_holder_bump(1.0, 1)
    assert est.run(FailureInjector(0.0), f, RandomSource(0)).value == f.exact_integral
    assert est.run(FailureInjector(1.0), f, RandomSource(0)).value == f.exact_integral + 1.0


# -- control variates ---------------------------------------------------------------


def test_cv_constant_exact_zero_variance():
    f = make_constant(0.3, 2)
    vals = {est.control_variate(f, 4, 9, RandomSource(s)).value for s in range(20)}
    assert vals == {0.3}


def test_cv_affine_exact():
    f = make_affine([1.0])
    # dyadic grids reproduce x bit-for-bit; other grids up to rounding
    for s in range(20):
        assert est.control_variate(f, 4, 5, RandomSource(s)).value == 0.5
        assert est.control_variate(f, 64, 5, RandomSource(s)).value == 0.5
        assert est.control_variate(f, 3, 5, RandomSource(s)).value == pytest.approx(0.5, abs=1e-15)
    g = make_affine([1.0, -2.0], 0.25)
    assert est.control_variate(g, 3, 5, RandomSource(1)).value == pytest.approx(g.exact_integral, abs=1e-15)


@pytest.mark.parametrize("d,m", [(1, 7), (2, 5), (3, 3)])
def test_interpolant_matches_scipy_oracle(d, m):
    f = make_sobolev_poly_bump(2, 2.0, d) if d < 3 else make_holder_bump(1.0, 3)
    g, integral, n_nodes = est.multilinear_interpolant(f, m)
    assert n_nodes == (m + 1) ** d
    nodes = np.linspace(0, 1, m + 1)
    mesh = np.stack(np.meshgrid(*([nodes] * d), indexing="ij"), axis=-1).reshape(-1, d)
    values = f(mesh).reshape((m + 1,) * d)
    oracle = RegularGridInterpolator([nodes] * d, values, method="linear")
    probe = np.random.default_rng(0).random((2000, d))
    assert np.allclose(g(probe), oracle(probe), atol=1e-15, rtol=1e-12)
    # exact integral of the interpolant is the tensor trapezoid rule
    t = values
    for _ in range(d):
        t = trapezoid(t, nodes, axis=0)
    assert integral == pytest.approx(float(t), rel=1e-13)


def test_interpolant_order_two():
    f = make_sobolev_poly_bump(2, 2.0, 1)
    probe = np.linspace(0, 1, 10**5).reshape(-1, 1)

    def sup_err(m):
        g, _, _ = est.multilinear_interpolant(f, m)
        return float(np.max(np.abs(f(probe) - g(probe))))

    # err * m**2 rises towards its limit; fit the leading constant with a 1/m correction
    ms = np.array([8.0, 16.0, 32.0])
    errs = np.array([sup_err(int(m)) for m in ms])
    design = np.column_stack([ms**-2, ms**-3])
    (constant, _), *_ = np.linalg.lstsq(design, errs, rcond=None)
    assert sup_err(64) <= constant * 64**-2.0
    # order two: halving the mesh divides the error by about four
    assert sup_err(32) / sup_err(64) == pytest.approx(4.0, rel=0.1)


def test_cv_evals_and_guard():
    f = make_holder_bump(1.0, 2)
    assert est.control_variate(f, 4, 10, RandomSource(0)).evals_used == 25 + 10
    with pytest.raises(BudgetError):
        est.control_variate(make_holder_bump(1.0, 4), 2, 2, RandomSource(0))
    with pytest.raises(BudgetError):
        est.run(ControlVariate(100, 10, budget=1000), f, RandomSource(0))


# -- Frolov ---------------------------------------------------------------------------


def test_frolov_forced_hat():
    f = make_holder_bump(1.0, 1)
    e = est.frolov_1d(f, 2, RandomSource(0), u=1.0, v=0.5)
    assert e.value == pytest.approx(0.25, rel=1e-15)
    assert e.evals_used == 2


def test_frolov_forced_counterexample_zero():
    f = make_frolov_counterexample(4, 1)
    pts = (np.arange(4) + 0.6) / 4
    assert np.allclose(pts, [0.15, 0.4, 0.65, 0.9])
    for k in range(4):
        vanishing = [((2 * j + 1) / 8, (j + 1) / 4) for j in range(4)]
        assert any(lo <= pts[k] <= hi for lo, hi in vanishing)
    e = est.frolov_1d(f, 4, RandomSource(0), u=1.0, v=0.6)
    assert e.value == 0.0
    assert e.evals_used == 4


@pytest.mark.parametrize("u", [0.5, 0.77, 1.0, 1.31, 1.5])
@pytest.mark.parametrize("fn", ["holder:beta=1,d=1", "sobolev:r=2,p=2,d=1", "frolov:n=4,r=1"])
def test_frolov_shift_average_is_exact(u, fn):
    f = parse_function(fn)
    n = 8
    q = 10**4
    vs = (np.arange(q) + 0.5) / q
    mean = np.mean([est.frolov_1d(f, n, RandomSource(0), u=u, v=v).value for v in vs])
    assert mean == pytest.approx(f.exact_integral, abs=1e-6)


def test_frolov_node_count():
    f = make_holder_bump(1.0, 1)
    counts = []
    for s in range(2000):
        e = est.run(Frolov1D(10), f, RandomSource(s))
        counts.append(e.evals_used)
    counts = np.array(counts)
    assert counts.min() >= 4 and counts.max() <= 16
    assert abs(counts.mean() - 10) <= 1.0


def test_frolov_rejects_higher_dimension():
    with pytest.raises(UnsupportedDimensionError):
        est.frolov_1d(make_holder_bump(1.0, 2), 4, RandomSource(0))


# -- accounting and determinism ------------------------------------------------------


KINDS = [
    PlainMC(13),
    Stratified(5),
    Median(3, Stratified(4)),
    Median(5, PlainMC(3)),
    ControlVariate(6, 11),
    Frolov1D(9),
    Median(3, Frolov1D(5)),
]


@pytest.mark.parametrize("kind", KINDS, ids=repr)
def test_evals_used_matches_counter(kind, counter):
    for s in range(10):
        c = counter(make_holder_bump(1.0, 1))
        e = est.run(kind, c.f, RandomSource(s))
        assert e.evals_used == c.points


@pytest.mark.parametrize("kind", [PlainMC(4), Stratified(3), ControlVariate(2, 5)], ids=repr)
def test_evals_used_matches_counter_2d(kind, counter):
    c = counter(make_sobolev_poly_bump(1, 2.0, 2))
    assert est.run(kind, c.f, RandomSource(3)).evals_used == c.points


@pytest.mark.parametrize("kind", KINDS, ids=repr)
def test_determinism_across_threads(kind):
    f = make_holder_bump(1.0, 1)
    one = run_trials(TrialPlan(kind, f, 0.1, 300, 42), threads=1)
    many = run_trials(TrialPlan(kind, f, 0.1, 300, 42), threads=4)
    assert one == many
    assert est.run(kind, f, RandomSource(5)) == est.run(kind, f, RandomSource(5))


def test_run_rejects_unknown_kind():
    with pytest.raises(ParameterError):
        est.run("plain", make_constant(1.0), RandomSource(0))
