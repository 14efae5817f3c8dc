"""Command-line front end.

Subcommands: ``estimate``, ``failure-prob``, ``rate-sweep``, ``verify-lemmas``,
``verify-bounds`` and ``counterexample`` (shorthand for
``verify-bounds --suite counterexample``).

Exit codes: 0 success / all checks pass, 1 runtime or statistical failure,
2 usage error. Options may also come from a JSON object given with
``--config``; explicit flags take precedence, unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import bounds, harness
from . import estimators as est
from .descriptors import parse_function
from .errors import BudgetError, ParameterError, UnsupportedDimensionError
from .testfn import make_frolov_counterexample, make_sobolev_poly_bump

DEFAULT_SEED = 20190601
ESTIMATORS = ("plain", "stratified", "median", "cv", "frolov", "inject")
SUITES = ("strat-holder", "strat-w1p", "median", "bakhvalov", "counterexample")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits for floats, so values round-trip through text."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _int_list(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


# -- option handling ---------------------------------------------------------

COMMON = {"seed": DEFAULT_SEED, "out": None, "threads": 1, "json": False}

DEFAULTS = {
    "estimate": {"est": None, "fn": None, "n": None, "m": None, "k": None, "inner": "plain",
                 "m_grid": None, "n_mc": None, "alpha": 0.125},
    "failure-prob": {"est": None, "fn": None, "n": None, "m": None, "k": None, "inner": "plain",
                     "m_grid": None, "n_mc": None, "alpha": 0.125, "epsilon": None, "trials": 10000},
    "rate-sweep": {"est": "stratified", "fn": "holder:beta=1,d=1", "ns": "16,32,64,128,256,512,1024,2048,4096",
                   "reps": 1000, "statistic": "median-abs-error", "k": 3, "inner": "plain",
                   "expect_slope": None, "slope_tol": 0.15, "epsilon_rule": None, "delta": 0.05},
    "verify-lemmas": {"k_max": 300},
    "verify-bounds": {"suite": None, "ns": None, "trials": None, "alpha": 0.125, "k": "1,3,5,7",
                      "delta": 0.05, "p": 2.0, "r": 1, "n_min": 17, "n_max": 60, "grid": 50},
}


def _add_estimator_flags(p):
    p.add_argument("--est", choices=ESTIMATORS, help="estimator")
    p.add_argument("--fn", help="function descriptor, e.g. holder:beta=1,d=1")
    p.add_argument("--n", type=int, help="sample budget (plain, frolov)")
    p.add_argument("--m", type=int, help="cells per axis (stratified)")
    p.add_argument("--k", type=int, help="median repetitions (odd)")
    p.add_argument("--inner", choices=ESTIMATORS, help="inner estimator of the median")
    p.add_argument("--m-grid", dest="m_grid", type=int, help="interpolation cells per axis (cv)")
    p.add_argument("--n-mc", dest="n_mc", type=int, help="residual samples (cv)")
    p.add_argument("--alpha", type=float, help="failure probability of the injector")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confquad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        p.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--threads", type=int, help="worker threads; results do not depend on it")
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
        return p

    p = add("estimate", "run one estimator once")
    _add_estimator_flags(p)

    p = add("failure-prob", "empirical failure probability over repeated trials")
    _add_estimator_flags(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--trials", type=int)

    p = add("rate-sweep", "error statistic over a budget sweep, with a log-log fit")
    p.add_argument("--est", choices=ESTIMATORS)
    p.add_argument("--fn")
    p.add_argument("--ns", help="comma-separated budgets")
    p.add_argument("--reps", type=int)
    p.add_argument("--statistic", choices=harness.STATISTICS)
    p.add_argument("--k", type=int)
    p.add_argument("--inner", choices=ESTIMATORS)
    p.add_argument("--expect-slope", dest="expect_slope", type=float)
    p.add_argument("--slope-tol", dest="slope_tol", type=float)
    p.add_argument("--epsilon-rule", dest="epsilon_rule", choices=("holder", "w1p"))
    p.add_argument("--delta", type=float)

    p = add("verify-lemmas", "exact scan of the binomial tail lemmas")
    p.add_argument("--k-max", dest="k_max", type=int)

    for name in ("verify-bounds", "counterexample"):
        p = add(name, "statistical and exact checks of the guarantees")
        if name == "verify-bounds":
            p.add_argument("--suite", choices=SUITES)
        p.add_argument("--n", dest="ns", help="budget(s), comma-separated")
        p.add_argument("--trials", type=int)
        p.add_argument("--alpha", type=float)
        p.add_argument("--k", help="repetition count(s), comma-separated")
        p.add_argument("--delta", type=float)
        p.add_argument("--p", type=float)
        p.add_argument("--r", type=int)
        p.add_argument("--n-min", dest="n_min", type=int)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--grid", type=int)
    return parser


def resolve_options(command: str, explicit: dict) -> dict:
    key = "verify-bounds" if command == "counterexample" else command
    opts = dict(COMMON)
    opts.update(DEFAULTS[key])
    config_path = explicit.pop("config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
        unknown = sorted(set(config) - set(opts))
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        opts.update(config)
    opts.update(explicit)
    if command == "counterexample":
        opts["suite"] = "counterexample"
    if not 0 <= int(opts["seed"]) < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    if int(opts["threads"]) < 1:
        raise UsageError("threads must be positive")
    return opts


# -- estimator construction ------------------------------------------------------


def _need(opts, key, why):
    if opts.get(key) is None:
        raise UsageError(f"--{key.replace('_', '-')} is required for {why}")
    return opts[key]


def _kind_from_opts(name, opts, allow_median=True):
    if name == "plain":
        return est.PlainMC(_need(opts, "n", "plain"))
    if name == "stratified":
        return est.Stratified(_need(opts, "m", "stratified"))
    if name == "cv":
        return est.ControlVariate(_need(opts, "m_grid", "cv"), _need(opts, "n_mc", "cv"))
    if name == "frolov":
        return est.Frolov1D(_need(opts, "n", "frolov"))
    if name == "inject":
        return est.FailureInjector(float(opts["alpha"]))
    if name == "median":
        if not allow_median:
            raise UsageError("nested medians are not supported from the command line")
        k = _need(opts, "k", "median")
        if k % 2 == 0 or k < 1:
            raise UsageError("k must be odd")
        return est.Median(k, _kind_from_opts(opts["inner"], opts, allow_median=False))
    raise UsageError(f"unknown estimator {name!r}")


def _factory(name, d, opts):
    """Map a sweep budget ``n`` to an estimator using about ``n`` evaluations."""
    if name == "plain":
        return lambda n: est.PlainMC(n)
    if name == "stratified":
        return lambda n: est.Stratified(max(1, int(math.floor(n ** (1.0 / d) + 1e-9))))
    if name == "cv":
        if d == 1:
            return lambda n: est.ControlVariate(max(1, n // 2), max(1, n // 2))
        return lambda n: est.ControlVariate(max(1, int(round((n / 2) ** (1.0 / d))) - 1), max(1, n // 2))
    if name == "frolov":
        return lambda n: est.Frolov1D(n)
    if name == "inject":
        return lambda n: est.FailureInjector(float(opts.get("alpha", 0.125)))
    if name == "median":
        k = int(opts["k"])
        if k % 2 == 0 or k < 1:
            raise UsageError("k must be odd")
        inner = _factory(opts["inner"], d, opts)
        return lambda n: est.Median(k, inner(n))
    raise UsageError(f"unknown estimator {name!r}")


# -- output --------------------------------------------------------------------


def _render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, opts) -> None:
    if opts.get("out"):
        with open(opts["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    return str(o)


def _echo(opts):
    return {k: v for k, v in sorted(opts.items()) if k not in ("out", "json")}


# -- subcommands -----------------------------------------------------------------


def cmd_estimate(opts) -> int:
    f = parse_function(_need(opts, "fn", "estimate"))
    kind = _kind_from_opts(_need(opts, "est", "estimate"), opts)
    seed = int(opts["seed"])
    e = est.run(kind, f, est.RandomSource(seed))
    _emit(_json_text({"value": e.value, "evals_used": e.evals_used, "seed": seed,
                      "estimator": repr(kind), "function": opts["fn"]}), opts)
    return 0


def cmd_failure_prob(opts) -> int:
    f = parse_function(_need(opts, "fn", "failure-prob"))
    kind = _kind_from_opts(_need(opts, "est", "failure-prob"), opts)
    plan = harness.TrialPlan(kind, f, float(_need(opts, "epsilon", "failure-prob")),
                             int(opts["trials"]), int(opts["seed"]))
    s = harness.empirical_failure(plan, threads=int(opts["threads"]))
    if opts["json"]:
        _emit(_json_text({"plan": _echo(opts), "stats": s.__dict__}), opts)
    else:
        _emit(_render_csv(["trials", "failures", "rate", "ci_low", "ci_high"],
                          [[s.trials, s.failures, s.rate, s.ci_low, s.ci_high]]), opts)
    return 0


def _epsilon_rule(opts, d):
    rule = opts.get("epsilon_rule")
    delta = float(opts["delta"])
    if rule == "holder":
        f = parse_function(opts["fn"])
        beta = f.cls.beta if f.cls.kind == "holder" else 1.0
        return lambda n: bounds.strat_holder_epsilon(int(math.floor(n ** (1.0 / d) + 1e-9)), d, beta, delta).epsilon
    if rule == "w1p":
        f = parse_function(opts["fn"])
        return lambda n: bounds.strat_w1p_epsilon(n, f.cls.q, delta).epsilon
    return None


def cmd_rate_sweep(opts) -> int:
    ns = _int_list(opts["ns"])
    if len(ns) < 3:
        raise UsageError("need >= 3 points for a rate fit")
    f = parse_function(opts["fn"])
    factory = _factory(opts["est"], f.d, opts)
    eps_fn = _epsilon_rule(opts, f.d)
    if opts["statistic"] == "failure-rate" and eps_fn is None:
        raise UsageError("failure-rate needs --epsilon-rule")
    rows = harness.sweep(ns, factory, f, int(opts["reps"]), opts["statistic"], int(opts["seed"]),
                         eps_fn, threads=int(opts["threads"]))
    stats_ok = all(r.statistic > 0 for r in rows)
    fit = harness.fit_rate([(r.n, r.statistic) for r in rows]) if stats_ok else None
    verdict = None
    if opts.get("expect_slope") is not None:
        verdict = fit is not None and abs(fit.slope - float(opts["expect_slope"])) <= float(opts["slope_tol"])
    slope = fit.slope if fit else math.nan
    intercept = fit.intercept if fit else math.nan
    r2 = fit.r_squared if fit else math.nan
    if opts["json"]:
        _emit(_json_text({
            "plan": _echo(opts),
            "rows": [r.__dict__ for r in rows],
            "fit": None if fit is None else {"slope": slope, "intercept": intercept, "r_squared": r2},
            "pass": verdict,
        }), opts)
    else:
        _emit(_render_csv(["n", "statistic", "evals_mean", "slope", "intercept", "r_squared"],
                          [[r.n, r.statistic, r.evals_mean, slope, intercept, r2] for r in rows]), opts)
    return 1 if verdict is False else 0


def lemma_rows(k_max: int):
    """All in-range rows of both binomial lemmas for ``k <= k_max``."""
    rows = []
    for k in range(1, k_max + 1):
        for t in range(bounds.lemma_a1_range(k) + 1):
            res = bounds.lemma_a1_check(k, t)
            rows.append(["A1", k, t, str(res.lhs), res.rhs, res.holds])
        for kp in range(k + 1):
            res = bounds.lemma_a2_check(k, kp)
            rows.append(["A2", k, kp, str(res.lhs), f"1/{2**kp}", res.holds])
    return rows


def cmd_verify_lemmas(opts) -> int:
    k_max = int(opts["k_max"])
    if k_max < 1:
        raise UsageError("k-max must be >= 1")
    rows = lemma_rows(k_max)
    if opts["json"]:
        text = _json_text({"plan": _echo(opts), "rows": len(rows),
                           "violations": sum(not r[-1] for r in rows)})
    else:
        text = _render_csv(["lemma", "k", "t", "lhs", "rhs", "holds"], rows)
    _emit(text, opts)
    return 0 if all(r[-1] for r in rows) else 1


# verify-bounds suites return rows of (suite, check, statistic, target, ci_low, ci_high, pass)


def _suite_strat_holder(opts):
    ns = _int_list(opts["ns"] or "64,256,1024")
    trials = int(opts["trials"] or 10000)
    delta = float(opts["delta"])
    f = parse_function("holder:beta=1,d=1")
    rows = []
    for i, n in enumerate(ns):
        g = bounds.strat_holder_epsilon(n, 1, 1.0, delta)
        plan = harness.TrialPlan(est.Stratified(n), f, g.epsilon, trials, int(opts["seed"]), (i,))
        errs = harness.error_samples(plan, int(opts["threads"]))
        fails = sum(e > g.epsilon for e in errs)
        lo, hi = harness.clopper_pearson(fails, trials)
        rows.append(["strat-holder", f"failure n={n} eps={g.epsilon:.6g}", fails / trials, delta, lo, hi, lo <= delta])
        cap = f.norm_bound * n**-1.0
        rows.append(["strat-holder", f"deterministic cap n={n}", max(errs), cap, "", "", max(errs) <= cap])
    return rows


def _suite_strat_w1p(opts):
    ns = _int_list(opts["ns"] or "64,256,1024")
    trials = int(opts["trials"] or 10000)
    delta = float(opts["delta"])
    p = float(opts["p"])
    f = parse_function(f"sobolev:r=1,p={p},d=1")
    rows = []
    for i, n in enumerate(ns):
        g = bounds.strat_w1p_epsilon(n, f.cls.q, delta)
        plan = harness.TrialPlan(est.Stratified(n), f, g.epsilon, trials, int(opts["seed"]), (i,))
        s = harness.empirical_failure(plan, int(opts["threads"]))
        rows.append(["strat-w1p", f"failure n={n} q={f.cls.q:g}", s.rate, delta, s.ci_low, s.ci_high, s.ci_low <= delta])
    return rows


def _suite_median(opts):
    alpha = float(opts["alpha"])
    ks = _int_list(opts["k"])
    trials = int(opts["trials"] or 100000)
    f = parse_function("const:c=0")
    rows = []
    for i, k in enumerate(ks):
        if k % 2 == 0 or k < 1:
            raise UsageError("k must be odd")
        tight, _ = bounds.median_failure_bound(alpha, k)
        plan = harness.TrialPlan(est.Median(k, est.FailureInjector(alpha)), f, 0.5, trials, int(opts["seed"]), (i,))
        s = harness.empirical_failure(plan, int(opts["threads"]))
        rows.append(["median", f"alpha={alpha:g} k={k}", s.rate, tight, s.ci_low, s.ci_high, s.ci_low <= tight])
    return rows


def bakhvalov_violations(n_min: int, n_max: int, grid: int):
    rows = []
    for n in range(n_min, n_max + 1):
        k = 4 * n + 6
        bad = 0
        for i in range(1, grid + 1):
            e = Fraction(n * i, grid)
            prob = bounds.bakhvalov_exact_uncertainty(k, e)
            bad += not bounds.exceeds_third_power_of_quarter(prob, e * e / n)
        rows.append((n, k, bad))
    return rows


def _suite_bakhvalov(opts):
    rows = []
    for n, k, bad in bakhvalov_violations(int(opts["n_min"]), int(opts["n_max"]), int(opts["grid"])):
        rows.append(["bakhvalov", f"n={n} k={k}", bad, 0, "", "", bad == 0])
    return rows


def _suite_counterexample(opts):
    ns = _int_list(opts["ns"] or "4,8,16")
    trials = int(opts["trials"] or 100000)
    r = int(opts["r"])
    rows = []
    for i, n in enumerate(ns):
        f = make_frolov_counterexample(n, r)
        # n bumps, each of width 1/(2n) and height scale (2n)**-r
        closed = 0.5 * float(2 * n) ** -r * make_sobolev_poly_bump(r, 2.0, 1).exact_integral
        ok_int = abs(f.exact_integral - closed) <= 1e-12 * abs(closed)
        rows.append(["counterexample", f"integral n={n}", f.exact_integral, closed, "", "", ok_int])
        plan = harness.TrialPlan(est.Frolov1D(n), f, 1.0, trials, int(opts["seed"]), (i,))
        zeros = sum(e.value == 0.0 for e in harness.run_trials(plan, int(opts["threads"])))
        lo, hi = harness.clopper_pearson(zeros, trials)
        target = 1.0 / (16 * n)
        rows.append(["counterexample", f"P(Q=0) n={n}", zeros / trials, target, lo, hi, hi >= target])
    return rows


SUITE_RUNNERS = {
    "strat-holder": _suite_strat_holder,
    "strat-w1p": _suite_strat_w1p,
    "median": _suite_median,
    "bakhvalov": _suite_bakhvalov,
    "counterexample": _suite_counterexample,
}


def cmd_verify_bounds(opts) -> int:
    suite = opts.get("suite")
    if suite not in SUITE_RUNNERS:
        raise UsageError(f"--suite must be one of {SUITES}")
    rows = SUITE_RUNNERS[suite](opts)
    header = ["suite", "check", "statistic", "target", "ci_low", "ci_high", "pass"]
    if opts["json"]:
        _emit(_json_text({"plan": _echo(opts), "checks": [dict(zip(header, r)) for r in rows],
                          "pass": all(r[-1] for r in rows)}), opts)
    else:
        _emit(_render_csv(header, rows), opts)
    return 0 if all(r[-1] for r in rows) else 1


COMMANDS = {
    "estimate": cmd_estimate,
    "failure-prob": cmd_failure_prob,
    "rate-sweep": cmd_rate_sweep,
    "verify-lemmas": cmd_verify_lemmas,
    "verify-bounds": cmd_verify_bounds,
    "counterexample": cmd_verify_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    explicit = vars(args)
    command = explicit.pop("command")
    try:
        opts = resolve_options(command, explicit)
        return COMMANDS[command](opts)
    except (UsageError, ParameterError, UnsupportedDimensionError) as exc:
        print(f"confquad {command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, BudgetError) as exc:
        print(f"confquad {command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
