"""Command-line runner: ``lab <experiment> --config FILE [--seed N] [--threads N] [--out PATH] [--format json|csv]``.

A config file is a JSON object with optional keys ``experiment``, ``seed``,
``threads`` and ``params``; ``--param name=value`` (value parsed as JSON)
overrides single parameters.  Every parameter is validated against the
experiment's schema and all violations are reported before anything runs.

Exit status: 0 when every hard check passed, 1 when some check failed,
2 for usage or schema errors (no report written), 3 for I/O errors.
"""

import argparse
import datetime as _dt
import functools
import json
import math
import os
import sys
from dataclasses import dataclass

from . import __version__, kernels
from .reports import ReportIOError, atomic_write, render

REQUIRED = object()
SEED_MAX = 2**64


class SchemaError(ValueError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass(frozen=True)
class Param:
    kind: str  # float | int | bool | str | floats | ints
    default: object = REQUIRED
    check: object = None  # callable(value) -> error text or None
    nullable: bool = False
    choices: tuple = None


def _positive(v):
    return None if v > 0 else "must be positive"


def _nonneg(v):
    return None if v >= 0 else "must be >= 0"


def _at_least(lo):
    return lambda v: None if v >= lo else f"must be >= {lo}"


def _between(lo, hi):
    return lambda v: None if lo <= v <= hi else f"must lie in [{lo}, {hi}]"


def _all(check):
    def run(vs):
        for v in vs:
            err = check(v)
            if err:
                return f"every entry {err}"
        return None if vs else "must be nonempty"
    return run


LOG_1E4, LOG_1E6 = math.log(1e4), math.log(1e6)
SIEVE_LOG_MAX = math.log(2e8)

SCHEMAS = {
    "grid": {
        "log_t": Param("float", REQUIRED, lambda v: None if v > math.e else "must exceed e"),
        "k": Param("float", 1.0, _positive),
        "v": Param("float", None, nullable=True),
        "gamma": Param("float", 1 / 25, lambda v: None if 0 < v < 0.05 else "must lie in (0, 1/20)"),
        "cutoff": Param("float", 2.0, _positive),
    },
    "sieve": {
        "limit": Param("int", 10**6, _between(2, 2 * 10**8)),
    },
    "partial-sums": {
        "log_t": Param("float", 10.0, _between(3.0, 20.0)),
        "log_x": Param("float", 4.0, _between(1.0, SIEVE_LOG_MAX)),
        "n_samples": Param("int", 2000, _positive),
        "lam": Param("float", None, _positive, nullable=True),
        "c_const": Param("float", 2.0, _positive),
    },
    "levelset": {
        "log_t": Param("float", 20.0, _between(3.0, 22.0)),
        "v_multipliers": Param("floats", [0.0, 0.5, 1.0, 1.5, 2.0, 2.5]),
        "n_samples": Param("int", 20_000, _positive),
    },
    "moments": {
        "log_tells": Param("floats", [LOG_1E4, LOG_1E6], _all(_between(1.0, SIEVE_LOG_MAX))),
        "factor": Param("float", 25.0, _at_least(1.0)),
        "variance_slack": Param("float", 1.0, _positive),
        "covariance_slack": Param("float", 2.0, _positive),
        "mc_trials": Param("int", 0, _nonneg),
        "mc_se": Param("float", 3.0, _positive),
    },
    "surrogate-clt": {
        "log_tell": Param("float", LOG_1E6, _between(1.0, SIEVE_LOG_MAX)),
        "factor": Param("float", 25.0, _at_least(1.0)),
        "n_samples": Param("int", 100_000, _at_least(2)),
        "model": Param("str", "steinhaus", choices=("steinhaus", "gaussian")),
        "ks_max": Param("float", 0.01, _positive),
    },
    "moment-bounds": {
        "log_tell": Param("float", math.log(12), _between(1.0, 10.0)),
        "log_lower": Param("float", math.log(4), _positive),
        "qs": Param("ints", [1, 2, 3], _all(_between(1, 6))),
        "ceiling": Param("float", math.e, _positive),
        "gaussian_log_tell": Param("float", math.log(500), _between(1.0, SIEVE_LOG_MAX)),
        "gaussian_trials": Param("int", 60_000, _at_least(2)),
        "gaussian_se": Param("float", 4.0, _positive),
    },
    "mgf": {
        "max_log_tl": Param("float", LOG_1E6, _between(1.0, SIEVE_LOG_MAX)),
        "lams": Param("floats", [0.5, 1.0, 2.0], _all(_positive)),
        "bound_ratio": Param("float", 10.0, _positive),
    },
    "indicator": {
        "delta": Param("float", 3.0, _positive),
        "a": Param("float", 5.0, lambda v: None if v > 2 else "must exceed 2"),
        "range_x": Param("float", None, _positive, nullable=True),
        "n_grid": Param("int", 10_000, _at_least(10)),
    },
    "barriers": {
        "log_t": Param("float", 8.0, _between(3.0, SIEVE_LOG_MAX)),
        "k": Param("float", 0.5, _positive),
        "cutoff": Param("float", 1.0, _positive),
        "n": Param("int", 100_000, _positive),
        "source": Param("str", "steinhaus", choices=("steinhaus", "gaussian", "zeta_tau")),
        "mesh_scale": Param("float", 1.0, _positive),
    },
    "two-point": {
        "log_t": Param("float", 8.0, _between(3.0, SIEVE_LOG_MAX)),
        "k": Param("float", 0.5, _positive),
        "cutoff": Param("float", 1.0, _positive),
        "ell": Param("int", 1, _at_least(1)),
        "m": Param("int", 1, _at_least(1)),
        "m_prime": Param("int", 2, _at_least(1)),
        "n": Param("int", 100_000, _at_least(2)),
        "min_correlation": Param("float", 0.9),
        "sweep_log_tells": Param("floats", [LOG_1E4, LOG_1E6], _all(_between(1.0, SIEVE_LOG_MAX))),
        "sweep_factors": Param("floats", [1.0, 2.0, 5.0, 25.0, 50.0, 100.0], _all(_at_least(1.0))),
        "bound": Param("float", 2.0, _positive),
    },
    "short-max": {
        "log_t": Param("float", 12.0, _between(3.0, 22.0)),
        "gamma": Param("float", 0.5, _between(0.0, 2.0)),
        "n_centers": Param("int", 20, _positive),
        "ys": Param("floats", [0.0, 1.0, 2.0]),
        "grid_step": Param("float", 0.05, _between(1e-4, 0.05)),
    },
}

STOCHASTIC = {"partial-sums", "levelset", "moments", "surrogate-clt", "moment-bounds",
              "barriers", "two-point", "short-max"}

TARGETS = {
    "grid": ["checkpoint_scales", "length_exponents", "barriers", "union_count"],
    "sieve": ["mertens"],
    "partial-sums": ["prime_partial_sum", "majorant"],
    "levelset": ["selberg_clt"],
    "moments": ["variance", "covariance"],
    "surrogate-clt": ["selberg_clt"],
    "moment-bounds": ["moment_bound"],
    "mgf": ["mgf_steinhaus"],
    "indicator": ["indicator_polynomial"],
    "barriers": ["event_partition", "partition_split", "primed_barrier_implication", "increment_grid_cover"],
    "two-point": ["two_point_profile"],
    "short-max": ["short_interval_max"],
}


# ------------------------------------------------------------- validation

def _coerce(name, p, value):
    """Return (value, error)."""
    if value is None:
        return (None, None) if p.nullable else (None, f"{name}: null not allowed")
    if p.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return None, f"{name}: expected a number, got {type(value).__name__}"
        value = float(value)
        if not math.isfinite(value):
            return None, f"{name}: must be finite"
    elif p.kind == "int":
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            return None, f"{name}: expected an integer"
        value = int(value)
    elif p.kind == "bool":
        if not isinstance(value, bool):
            return None, f"{name}: expected true or false"
    elif p.kind == "str":
        if not isinstance(value, str):
            return None, f"{name}: expected a string"
        if p.choices and value not in p.choices:
            return None, f"{name}: must be one of {', '.join(p.choices)}"
    elif p.kind in ("floats", "ints"):
        if not isinstance(value, list):
            return None, f"{name}: expected a list"
        inner = Param(p.kind[:-1])
        out = []
        for i, v in enumerate(value):
            cv, err = _coerce(f"{name}[{i}]", inner, v)
            if err:
                return None, err
            out.append(cv)
        value = out
    if p.check is not None:
        err = p.check(value)
        if err:
            return None, f"{name}: {err}"
    return value, None


def validate(experiment, params, seed):
    """Resolved parameters, or SchemaError listing every problem."""
    problems = []
    if experiment not in SCHEMAS:
        raise SchemaError([f"unknown experiment {experiment!r}; expected one of {', '.join(SCHEMAS)}"])
    schema = SCHEMAS[experiment]
    if not isinstance(params, dict):
        raise SchemaError(["params: expected a JSON object"])
    for name in sorted(set(params) - set(schema)):
        problems.append(f"{name}: unknown parameter for {experiment}")
    resolved = {}
    for name, p in schema.items():
        if name in params:
            value, err = _coerce(name, p, params[name])
            if err:
                problems.append(err)
            resolved[name] = value
        elif p.default is REQUIRED:
            problems.append(f"{name}: required")
        else:
            resolved[name] = p.default
    if experiment in STOCHASTIC:
        if seed is None:
            problems.append("seed: required for a stochastic experiment")
        elif isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < SEED_MAX:
            problems.append("seed: must be an integer in [0, 2^64)")
    if not problems:
        problems.extend(_cross_checks(experiment, resolved))
    if problems:
        raise SchemaError(problems)
    return resolved


def _cross_checks(experiment, p):
    out = []
    if experiment in ("barriers", "two-point"):
        from .scale_grid import GridError, GridParams, build_grid

        try:
            g = build_grid(GridParams(p["log_t"], k=p["k"], cutoff=p["cutoff"]))
        except GridError as exc:
            return [f"grid: {exc}"]
        if experiment == "two-point":
            for key in ("ell", "m", "m_prime"):
                if p[key] > g.capital_l:
                    out.append(f"{key}: exceeds L = {g.capital_l}")
            if p["m"] < p["ell"] or p["m_prime"] < p["ell"]:
                out.append("m, m_prime: must be >= ell")
        if g.log_T(g.capital_l) > SIEVE_LOG_MAX:
            out.append("log_t: top checkpoint beyond the prime sieve")
    return out


# ------------------------------------------------------------ experiments

@functools.lru_cache(maxsize=4)
def _table(limit):
    from .primes import sieve_primes

    return sieve_primes(max(int(limit), 2))


def _table_for(log_x):
    return _table(math.floor(math.exp(log_x) * (1 + 1e-12)) + 1)


def _check(ok, value=None, tolerance=None):
    return {"pass": bool(ok), "value": value, "tolerance": tolerance}


def run_grid(p, seed, threads):
    from .scale_grid import (GridParams, barrier_bounds, build_grid, key_condition_exponents,
                             truncation_index, union_count_ok)

    g = build_grid(GridParams(p["log_t"], p["k"], p["v"], p["gamma"], p["cutoff"]))
    b = barrier_bounds(g)
    steps = [g.t(ell) - g.t(ell - 1) for ell in range(2, g.capital_l + 1)]
    res = dict(g.to_dict(), kappa=g.kappa, lower=b.lower, upper=b.upper, lower_prime=b.lower_prime,
               upper_prime=b.upper_prime, union_count_ok=union_count_ok(g),
               key_condition_exponents=key_condition_exponents(g),
               truncation=[truncation_index(g, ell).index for ell in range(1, g.capital_l + 1)])
    checks = {"unit_steps": _check(all(s == 1.0 for s in steps), steps, 0.0)}
    if p["cutoff"] >= 1:
        checks["union_count"] = _check(union_count_ok(g))
    return res, checks


PI_KNOWN = {10: 4, 100: 25, 1000: 168, 10**4: 1229, 10**5: 9592, 10**6: 78498, 10**7: 664579,
            10**8: 5761455}
MERTENS_E = -1.332582275733220881765828776


def run_sieve(p, seed, threads):
    from .primes import mertens_log_sum

    t = _table(p["limit"])
    m = mertens_log_sum(t, p["limit"]).value
    res = {"limit": p["limit"], "count": len(t), "largest": int(t.primes[-1]),
           "mertens_log_sum": m, "mertens_remainder": m - math.log(p["limit"]) - MERTENS_E}
    checks = {"ascending": _check(bool((t.primes[1:] > t.primes[:-1]).all()))}
    if p["limit"] in PI_KNOWN:
        checks["prime_count"] = _check(len(t) == PI_KNOWN[p["limit"]], len(t), 0)
    return res, checks


def run_partial_sums(p, seed, threads):
    from .dirichlet import dominance_experiment

    res = dominance_experiment(p["log_t"], p["log_x"], p["n_samples"], seed, p["lam"], p["c_const"],
                               _table_for(p["log_x"]))
    return res, {"finite": _check(math.isfinite(res["max_excess"]))}


def run_levelset(p, seed, threads):
    from .zeta import levelset_experiment

    res = levelset_experiment(p["log_t"], sorted(p["v_multipliers"]), p["n_samples"], seed)
    return res, {"monotone": _check(res["monotone"])}


def run_moments(p, seed, threads):
    from .dirichlet import make_spec
    from .models import aligned_weights, analytic_second_order, exact_moments, model_sums

    table = _table_for(max(p["log_tells"]))
    rows, checks = [], {}
    for lt in p["log_tells"]:
        a = make_spec(p["factor"] * lt, lt)
        b = make_spec(2 * p["factor"] * lt, lt)
        st = analytic_second_order(a, b, table)
        row = {"log_tell": lt, "variance": st.variance, "covariance": st.covariance,
               "half_loglog": st.predicted, "variance_upper_form": st.variance_upper_form}
        checks[f"variance@{lt:.6g}"] = _check(abs(st.variance - st.predicted) <= p["variance_slack"],
                                             st.variance - st.predicted, p["variance_slack"])
        checks[f"covariance@{lt:.6g}"] = _check(abs(st.covariance - st.predicted) <= p["covariance_slack"],
                                               st.covariance - st.predicted, p["covariance_slack"])
        if p["mc_trials"] > 1:
            _, W1, W2 = aligned_weights([(a, None)], table)
            x = model_sums(W1, W2, "steinhaus", seed, p["mc_trials"], threads=threads)[0][:, 0]
            m4 = exact_moments(W1[:, 0], W2[:, 0], 4)[4]
            n = x.shape[0]
            se = math.sqrt((m4 - st.variance ** 2) / n)  # var of the sample variance, leading order
            row.update(mc_variance=float(x.var(ddof=1)), mc_std_err=se, mc_trials=n)
            checks[f"mc_variance@{lt:.6g}"] = _check(abs(x.var(ddof=1) - st.variance) <= p["mc_se"] * se,
                                                     (x.var(ddof=1) - st.variance) / se, p["mc_se"])
        rows.append(row)
    return {"factor": p["factor"], "rows": rows}, checks


def run_surrogate_clt(p, seed, threads):
    from .dirichlet import make_spec
    from .models import surrogate_clt

    spec = make_spec(p["factor"] * p["log_tell"], p["log_tell"])
    res = surrogate_clt(spec, _table_for(p["log_tell"]), p["n_samples"], seed, p["model"], threads)
    return res, {"ks": _check(res["ks"] < p["ks_max"], res["ks"], p["ks_max"])}


def run_moment_bounds(p, seed, threads):
    from .dirichlet import make_spec
    from .models import aligned_weights, double_factorial_odd, model_sums, moment_bound_check

    table = _table_for(max(p["log_tell"], p["gaussian_log_tell"]))
    spec = make_spec(25 * p["log_tell"], p["log_tell"])
    rows, checks = [], {}
    for q in p["qs"]:
        ex = moment_bound_check(spec, p["log_lower"], q, table, "exact", ceiling=p["ceiling"])
        row = {"q": q, "exact": ex["empirical"], "bound": ex["bound"], "ratio": ex["ratio"]}
        try:
            row["torus"] = moment_bound_check(spec, p["log_lower"], q, table, "torus")["empirical"]
            checks[f"torus_agrees@q={q}"] = _check(abs(row["torus"] - row["exact"]) <= 1e-9 * abs(row["exact"]),
                                                   row["torus"] - row["exact"], 1e-9)
        except ValueError as exc:  # more than five primes in the support
            row["torus"] = str(exc)
        checks[f"ratio@q={q}"] = _check(ex["pass"], ex["ratio"], p["ceiling"])
        rows.append(row)
    gspec = make_spec(25 * p["gaussian_log_tell"], p["gaussian_log_tell"])
    _, W1, W2 = aligned_weights([(gspec, None)], table)
    var = 0.5 * (float((W1 ** 2).sum()) + float((W2 ** 2).sum()))
    x = model_sums(W1, W2, "gaussian", seed, p["gaussian_trials"], threads=threads)[0][:, 0]
    grows = []
    for q in p["qs"]:
        y = x ** (2 * q)
        target = double_factorial_odd(q) * var ** q
        se = float(y.std(ddof=1) / math.sqrt(y.shape[0]))
        z = (float(y.mean()) - target) / se
        grows.append({"q": q, "empirical": float(y.mean()), "target": target, "std_err": se, "z": z})
        checks[f"gaussian@q={q}"] = _check(abs(z) <= p["gaussian_se"], z, p["gaussian_se"])
    return {"rows": rows, "max_ratio": max(r["ratio"] for r in rows), "gaussian": grows}, checks


def run_mgf(p, seed, threads):
    from .models import desk_grids, mgf_ratio_table

    grids = desk_grids(p["max_log_tl"])
    rows = mgf_ratio_table(grids, _table_for(p["max_log_tl"]), tuple(p["lams"]))
    mx = max((r["ratio"] for r in rows), default=0.0)
    res = {"grids": len(grids), "rows": rows, "max_ratio": mx}
    return res, {"ratio": _check(bool(rows) and mx <= p["bound_ratio"], mx, p["bound_ratio"])}


def run_indicator(p, seed, threads):
    from .indicator import build_indicator_poly, ceiling_audit, corrupt_coefficient, validate_sandwich

    x = 10 * p["delta"] if p["range_x"] is None else p["range_x"]
    poly = build_indicator_poly(p["delta"], p["a"], x)
    rep = validate_sandwich(poly, p["n_grid"])
    audit = ceiling_audit(poly)
    bad = validate_sandwich(corrupt_coefficient(poly, 0), p["n_grid"])
    res = {"delta": poly.delta, "a": poly.a_exp, "range_x": poly.range_x, "degree": poly.degree,
           "error": poly.error, "error_parts": poly.error_parts, "sandwich": rep, "ceilings": audit,
           "negative_control": bad}
    checks = {
        "sandwich": _check(rep.lower_violations == 0 and rep.upper_violations == 0,
                           rep.lower_violations + rep.upper_violations, 0),
        "ceilings": _check(all(bool(v) for k, v in audit.items() if k.endswith("_ok"))),
        "negative_control": _check(bad.lower_violations + bad.upper_violations > 0,
                                   bad.lower_violations + bad.upper_violations),
    }
    return res, checks


def _desk_grid(p):
    from .scale_grid import GridParams, build_grid

    return build_grid(GridParams(p["log_t"], k=p["k"], cutoff=p["cutoff"]))


def run_barriers(p, seed, threads):
    from .barriers import (IncrementGrid, cover_check, evaluate_events, implication_check,
                           model_trajectories, partition_check, sufficient_mesh_scale, zeta_trajectories)
    from .scale_grid import barrier_bounds

    g = _desk_grid(p)
    if p["source"] == "zeta_tau":
        s = zeta_trajectories(g, _table_for(g.log_T(g.capital_l)), p["n"], seed)
    else:
        with_h = p["source"] == "steinhaus"
        top = g.log_t if with_h else g.log_T(g.capital_l)
        s = model_trajectories(g, _table_for(top), p["source"], p["n"], seed, threads=threads)
    ev = evaluate_events(s, barrier_bounds(g), g.v)
    imp = implication_check(ev, g)
    cov = cover_check(s, IncrementGrid.from_grid(g, p["mesh_scale"]))
    res = {"grid": g.to_dict(), "source": p["source"], "n": s.n, "implication": imp, "cover": cov,
           "sufficient_mesh_scale": sufficient_mesh_scale(g)}
    checks = {"implication": _check(imp["pass"]), "cover": _check(cov["pass"],
                                                                  sum(r["failures"] for r in cov["levels"]), 0)}
    if ev.in_H is not None:
        res["partition"] = partition_check(ev)
        checks["partition"] = _check(res["partition"]["pass"])
    return res, checks


def run_two_point(p, seed, threads):
    from .barriers import covariance_difference_sweep, model_trajectories, two_point_profile

    g = _desk_grid(p)
    table = _table_for(max(g.log_T(g.capital_l), max(p["sweep_log_tells"])))
    s = model_trajectories(g, table, "steinhaus", p["n"], seed, with_h=False, threads=threads)
    prof = two_point_profile(s, g, p["ell"], p["m"], p["m_prime"], table)
    sweep = covariance_difference_sweep(p["sweep_log_tells"], p["sweep_factors"], table, bound=p["bound"])
    res = {"profile": prof, "sweep": sweep}
    checks = {
        "covariance_sweep": _check(sweep["pass"], sweep["max_difference"], p["bound"]),
        "covariance_pair": _check(prof["covariance_difference"] <= p["bound"], prof["covariance_difference"],
                                  p["bound"]),
        "correlation": _check(prof["correlation"] >= p["min_correlation"], prof["correlation"],
                              p["min_correlation"]),
    }
    return res, checks


def run_short_max(p, seed, threads):
    from .zeta import short_max_experiment

    res = short_max_experiment(p["log_t"], p["gamma"], p["n_centers"], seed, tuple(p["ys"]), p["grid_step"])
    return res, {}


RUNNERS = {
    "grid": run_grid, "sieve": run_sieve, "partial-sums": run_partial_sums, "levelset": run_levelset,
    "moments": run_moments, "surrogate-clt": run_surrogate_clt, "moment-bounds": run_moment_bounds,
    "mgf": run_mgf, "indicator": run_indicator, "barriers": run_barriers, "two-point": run_two_point,
    "short-max": run_short_max,
}


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run_experiment(experiment, params=None, seed=None, threads=1):
    """Validate, dispatch and assemble the report dictionary.

    The ``results`` and ``checks`` sections depend only on the experiment,
    the parameters and the seed.
    """
    resolved = validate(experiment, params or {}, seed)
    started = _now()
    results, checks = RUNNERS[experiment](resolved, seed, threads)
    return {
        "config": {"experiment": experiment, "params": resolved, "seed": seed, "threads": threads},
        "started": started,
        "finished": _now(),
        "version": __version__,
        "backend": kernels.backend(),
        "results": results,
        "provenance": {"target_eq": TARGETS[experiment], "checks": checks,
                       "pass": all(c["pass"] for c in checks.values())},
    }


# -------------------------------------------------------------------- CLI

def _parser():
    ap = argparse.ArgumentParser(prog="lab", description="Run one experiment and emit a report.")
    ap.add_argument("experiment", help="one of: " + ", ".join(SCHEMAS))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out", help="output path (stdout when omitted)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                    help="override one parameter; VALUE is parsed as JSON")
    return ap


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise SchemaError([f"config: cannot read {path}: {exc.strerror}"]) from exc
    except json.JSONDecodeError as exc:
        raise SchemaError([f"config: invalid JSON in {path}: {exc.msg} at line {exc.lineno}"]) from exc
    if not isinstance(cfg, dict):
        raise SchemaError(["config: expected a JSON object"])
    extra = sorted(set(cfg) - {"experiment", "seed", "threads", "params"})
    if extra:
        raise SchemaError([f"config: unknown key {k!r}" for k in extra])
    return cfg


def _resolve_args(args):
    problems = []
    cfg = load_config(args.config) if args.config else {}
    if "experiment" in cfg and cfg["experiment"] != args.experiment:
        problems.append(f"experiment: config names {cfg['experiment']!r} but {args.experiment!r} was requested")
    params = dict(cfg.get("params", {})) if isinstance(cfg.get("params", {}), dict) else None
    if params is None:
        problems.append("params: expected a JSON object")
        params = {}
    for item in args.param:
        name, sep, raw = item.partition("=")
        if not sep or not name:
            problems.append(f"--param {item!r}: expected NAME=VALUE")
            continue
        try:
            params[name] = json.loads(raw)
        except json.JSONDecodeError:
            params[name] = raw
    seed = args.seed if args.seed is not None else cfg.get("seed")
    threads = args.threads if args.threads is not None else cfg.get("threads", os.cpu_count() or 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        problems.append("threads: must be a positive integer")
    try:
        validate(args.experiment, params, seed)
    except SchemaError as exc:
        problems = problems + exc.problems
    if problems:
        raise SchemaError(problems)
    return params, seed, threads


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        params, seed, threads = _resolve_args(args)
    except SchemaError as exc:
        for msg in exc.problems:
            print(f"schema error: {msg}", file=sys.stderr)
        return 2
    report = run_experiment(args.experiment, params, seed, threads)
    text = render(report, args.format)
    if args.out:
        try:
            atomic_write(args.out, text)
        except ReportIOError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 3
    else:
        sys.stdout.write(text)
    return 0 if report["provenance"]["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
