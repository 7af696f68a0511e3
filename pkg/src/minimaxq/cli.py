"""Command-line runner: bound, simulate, verify, pack and report.

Configuration files hold one ``dotted.key = value`` pair per line, for example::

    problem.name = gaussian_mean_sq
    problem.Sigma = 1,2,3,4,5
    estimator.kind = sample_mean
    run.n = 200
    run.reps = 20000
    run.deltas = 0.25,0.05
    run.seed = 1

``run.hypotheses`` picks hypothesis indices other than the problem's
simulation default.  Blank lines and lines starting with ``#`` are ignored.
Comma-separated values become lists.  Exit codes: 0 success, 1 verification failure, 2 usage,
configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .estimators import EstimatorSpec
from .montecarlo import QuantileEstimate, rate_fit, run_experiment, sandwich_check
from .packing import cube_packing_log_bound, gv_cube_packing, gv_sparse_packing, sparse_packing_log_bound
from .problems import REGISTRY, gaussian_design

COLUMNS = ["problem", "n", "d", "delta", "estimator", "lb", "emp_q_lo", "emp_q", "emp_q_hi", "ub", "reps", "seed"]
BOUND_COLUMNS = ["problem", "n", "d", "delta", "lb", "engine_lb", "ub", "lb_delta_max", "construction"]
NA = "n/a"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


def _coerce(text):
    text = text.strip()
    if "," in text:
        return [_coerce(part) for part in text.split(",") if part.strip()]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config(text):
    """Flat ``key = value`` text to a dict with coerced values."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = _coerce(value)
    return out


def load_config(path, overrides=()):
    cfg = {}
    if path:
        try:
            with open(path) as fh:
                cfg = parse_config(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    for item in overrides:
        cfg.update(parse_config(item))
    return cfg


def _section(cfg, prefix):
    prefix += "."
    return {k[len(prefix):]: v for k, v in cfg.items() if k.startswith(prefix)}


def _as_list(v):
    return v if isinstance(v, list) else [v]


def _matrix(spec, d=None, sigma=1.0):
    """Covariance from a list (diagonal), a scalar variance with ``d``, or sigma^2 I."""
    if spec is None:
        if d is None:
            raise ConfigError("need problem.Sigma or problem.d")
        return sigma**2 * np.eye(int(d))
    vals = np.asarray(_as_list(spec), dtype=float)
    if vals.size == 1 and d is not None:
        return float(vals[0]) * np.eye(int(d))
    return np.diag(vals)


def build_problem(params, n, delta):
    """Instantiate the named problem at sample size ``n`` and level ``delta``."""
    p = dict(params)
    name = p.pop("name", None)
    if name not in REGISTRY:
        raise ConfigError(f"unknown problem {name!r}; choose from {', '.join(REGISTRY)}")
    try:
        if name == "gaussian_mean_sq":
            return REGISTRY[name](n, _matrix(p.get("Sigma"), p.get("d"), p.get("sigma", 1.0)), delta)
        if name == "robust_mean_huber":
            return REGISTRY[name](n, _matrix(p.get("Sigma"), p.get("d"), p.get("sigma", 1.0)), float(p["eps"]), delta)
        if name == "gaussian_mean_linf":
            return REGISTRY[name](n, int(p["d"]), float(p.get("sigma", 1.0)), delta)
        if name == "covariance_opnorm":
            return REGISTRY[name](n, int(p["d"]), float(p.get("sigma", 1.0)), float(p["r"]), delta)
        if name == "sparse_regression":
            X = gaussian_design(n, int(p["d"]), np.random.default_rng(int(p.get("design_seed", 0))))
            return REGISTRY[name](
                X, float(p.get("sigma", 1.0)), int(p["s"]), float(p.get("c", 0.5)), float(p.get("C", 2.0)), delta, float(p.get("signal", 1.0))
            )
        if name == "density_point":
            return REGISTRY[name](n, float(p.get("beta", 1.0)), float(p.get("gamma", 1.0)), delta)
        if name == "isotonic":
            return REGISTRY[name](n, delta)
        if name == "sco_hard_instance":
            return REGISTRY[name](n, float(p.get("gamma", 1.0)), float(p.get("R", 1.0)), delta)
        return REGISTRY[name](n, float(p.get("sigma", 1.0)), delta)
    except KeyError as exc:
        raise ConfigError(f"problem {name} needs parameter {exc.args[0]!r}") from exc


def _estimator_spec(cfg):
    est = _section(cfg, "estimator")
    if not est:
        return None
    kind = est.pop("kind", None)
    if kind is None:
        raise ConfigError("estimator.kind is required when estimator keys are given")
    try:
        return EstimatorSpec(kind, est)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _run_settings(cfg, args=None):
    run = _section(cfg, "run")
    problem = _section(cfg, "problem")
    ns = run.get("n", problem.get("n", problem.get("T")))
    if ns is None:
        raise ConfigError("run.n is required")
    deltas = [float(x) for x in _as_list(run.get("deltas", 0.05))]
    if any(not 0 < x <= 1 for x in deltas):
        raise ConfigError("deltas must lie in (0, 1]")
    reps = int(run.get("reps", 1000))
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    seed = int(run.get("seed", 0))
    threads = int(run.get("threads", 1))
    if args is not None:
        seed = seed if args.seed is None else args.seed
        threads = threads if args.threads is None else args.threads
    return problem, [int(x) for x in _as_list(ns)], deltas, reps, seed, threads


def _fmt(x):
    if x is None:
        return NA
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def simulate_rows(cfg, args=None):
    """One row per (n, delta, simulation hypothesis)."""
    problem_cfg, ns, deltas, reps, seed, threads = _run_settings(cfg, args)
    spec = _estimator_spec(cfg)
    hyps = cfg.get("run.hypotheses")
    hyps = None if hyps is None else [int(h) for h in _as_list(hyps)]
    rows = []
    for n in ns:
        for delta in deltas:
            # the level shapes both the hypotheses and delta-dependent estimators
            prob = build_problem(problem_cfg, n, delta)
            if hyps is not None and not all(0 <= h < len(prob.hypotheses) for h in hyps):
                raise ConfigError(f"run.hypotheses must index the {len(prob.hypotheses)} hypotheses of {prob.name}")
            n_used = prob.params.get("n", prob.params.get("T", n))
            results = run_experiment(prob, spec, n_used, reps, (delta,), seed, threads, hyps)
            for res in results:
                q = res.quantiles[delta]
                rows.append(
                    {
                        "problem": prob.name,
                        "n": res.n,
                        "d": prob.dim,
                        "delta": delta,
                        "estimator": res.estimator,
                        "lb": prob.lb(delta),
                        "emp_q_lo": q.dkw_lo,
                        "emp_q": q.value,
                        "emp_q_hi": q.dkw_hi,
                        "ub": prob.ub(delta),
                        "reps": reps,
                        "seed": seed,
                        "hypothesis": res.hypothesis,
                    }
                )
    return rows


def render(rows, columns, fmt):
    if fmt == "json":
        return json.dumps([{k: r.get(k) for k in columns + [c for c in r if c not in columns]} for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([r[c] if isinstance(r[c], str) else _fmt(r[c]) for c in columns])
    return buf.getvalue()


def read_rows(path):
    """Rows back from a CSV or JSON results file; "n/a" becomes None."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("["):
        return json.loads(text)
    rows = []
    for raw in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in raw.items():
            if v == NA:
                row[k] = None
            elif k in ("problem", "estimator"):
                row[k] = v
            else:
                row[k] = _coerce(v)
        rows.append(row)
    return rows


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_bound(cfg, args):
    problem_cfg, ns, deltas, _, _, _ = _run_settings(cfg, args)
    rows = []
    for n in ns:
        for delta in deltas:
            prob = build_problem(problem_cfg, n, delta)
            lb = prob.lb(delta)
            engine = None
            notes = []
            if lb is not None and prob.engine_lb is not None:
                engine = prob.engine_lb(delta)
                notes = [f"{c.method}: {c.construction_note} (valid to {c.delta_max:.4g})" for c in prob.certificates(delta)]
            rows.append(
                {
                    "problem": prob.name,
                    "n": prob.params.get("n", prob.params.get("T", n)),
                    "d": prob.dim,
                    "delta": delta,
                    "lb": lb,
                    "engine_lb": engine,
                    "ub": prob.ub(delta),
                    "lb_delta_max": prob.lb_delta_max,
                    "construction": "; ".join(notes) or NA,
                }
            )
    _emit(render(rows, BOUND_COLUMNS, args.format), args.out)
    return EXIT_OK


def cmd_simulate(cfg, args):
    rows = simulate_rows(cfg, args)
    _emit(render(rows, COLUMNS, args.format), args.out)
    return EXIT_OK


def verify_rows(rows, lb_scale=1.0):
    """Sandwich verdicts for result rows, with the lower bound scaled by ``lb_scale``."""
    verdicts = []
    for r in rows:
        lb = None if r.get("lb") is None else float(r["lb"]) * lb_scale
        emp = QuantileEstimate(float(r["delta"]), float(r["emp_q"]), int(r["reps"]), float(r["emp_q_lo"]), float(r["emp_q_hi"]))
        verdicts.append(sandwich_check(lb, emp, r.get("ub")))
    return verdicts


def cmd_verify(cfg, args):
    rows = read_rows(args.results) if args.results else simulate_rows(cfg, args)
    lb_scale = float(cfg.get("verify.lb_scale", 1.0))
    verdicts = verify_rows(rows, lb_scale)
    failed = 0
    for r, v in zip(rows, verdicts):
        status = "PASS" if v.passed else "FAIL"
        failed += not v.passed
        upper = NA if v.upper_margin is None else f"{v.upper_margin:.6g}"
        print(f"{status} {r['problem']} n={r['n']} delta={r['delta']} lower_margin={v.lower_margin:.6g} upper_margin={upper}")
    print(f"{len(rows) - failed}/{len(rows)} rows pass")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_pack(cfg, args):
    d = args.d if args.d is not None else cfg.get("pack.d")
    s = args.s if args.s is not None else cfg.get("pack.s")
    if d is None or s is None:
        raise ConfigError("pack needs d and s")
    d, s = int(d), int(s)
    if not 1 <= s <= d:
        raise ConfigError("need 1 <= s <= d")
    if s == d:
        packing = gv_cube_packing(d, exhaustive=d < 20)
        header = [f"# full cube packing d={d} M={packing.size} min_distance>{packing.min_distance:g}", f"# log_bound d/8 = {_fmt(cube_packing_log_bound(d))}"]
    else:
        packing, _ = gv_sparse_packing(d, s)
        header = [f"# sparse packing d={d} s={s} M={packing.size} min_distance>{packing.min_distance:g}"]
    header.append(f"# log_bound (3s/4)log(d/(4s)) = {_fmt(sparse_packing_log_bound(d, s))}")
    _emit("\n".join(header + packing.to_lines()) + "\n", args.out)
    return EXIT_OK


def cmd_report(cfg, args):
    rows = read_rows(args.results) if args.results else simulate_rows(cfg, args)
    groups = {}
    for r in rows:
        groups.setdefault((r["problem"], r["estimator"], float(r["delta"])), []).append(r)
    out_rows = []
    lines = []
    for (problem, estimator, delta), rs in sorted(groups.items()):
        pts = sorted((float(r["n"]), float(r["emp_q"])) for r in rs)
        slope = None
        if len({p[0] for p in pts}) >= 3 and all(q > 0 for _, q in pts):
            slope = rate_fit(pts)
        ratios = [float(r["emp_q"]) / float(r["lb"]) for r in rs if r.get("lb")]
        worst = min(ratios) if ratios else None
        lines.append(
            f"{problem} [{estimator}] delta={delta:g}: {len(rs)} rows, "
            f"slope={NA if slope is None else f'{slope:.4f}'}, min emp/lb={NA if worst is None else f'{worst:.4g}'}"
        )
        out_rows.append({"problem": problem, "estimator": estimator, "delta": delta, "rows": len(rs), "slope": slope, "min_ratio_to_lb": worst})
    if args.out:
        _emit(render(out_rows, ["problem", "estimator", "delta", "rows", "slope", "min_ratio_to_lb"], args.format), args.out)
    print("\n".join(lines))
    return EXIT_OK


COMMANDS = {"bound": cmd_bound, "simulate": cmd_simulate, "verify": cmd_verify, "pack": cmd_pack, "report": cmd_report}


def build_parser():
    parser = argparse.ArgumentParser(prog="minimaxq", description="Minimax quantile bounds and Monte Carlo checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a configuration key")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--threads", type=int, help="worker threads for replications")
        p.add_argument("--out", help="output path (stdout by default)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if name in ("verify", "report"):
            p.add_argument("--results", help="existing results file instead of a fresh simulation")
        if name == "pack":
            p.add_argument("--d", type=int)
            p.add_argument("--s", type=int)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be nonnegative")
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be positive")
    try:
        cfg = load_config(args.config, args.set)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
