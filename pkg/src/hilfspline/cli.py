"""Command-line interface: ``hilfspline solve|converge|compare-pc``.

Settings come from built-in defaults, then a flat ``key = value`` config file
(``--config``), then command-line flags, later sources winning. Exit codes:
0 success, 2 invalid configuration, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import ConvergenceError, NonFiniteError
from .solver import SolverConfig, eval_solution, geometric_knots, solve, uniform_knots

__all__ = ["main", "build_parser", "load_config_file", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERIC"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# key -> parser applied to config-file strings
_KEYS = {
    "problem": str, "alpha": float, "beta": float, "y0": str, "T": float, "eps": float,
    "h": float, "knot_rule": str, "q": int, "q_prime": int, "tol": float,
    "max_iter": int, "mu": float, "k": float, "a": float, "samples": int,
    "points": int, "sweep": str, "values": str, "cap_iterations": str, "jobs": int,
    "out": str, "format": str,
}

_PROBLEM_DEFAULTS = {
    "poly": {"alpha": 0.5, "beta": 0.5, "y0": "1", "T": ex.POLY_T, "eps": 1e-10, "h": 2.0**-4},
    "linear": {"alpha": 0.5, "beta": 1.0, "y0": "1", "T": 15.0, "eps": 0.0, "h": 2.0**-4},
    "vdp": {"alpha": 0.5, "beta": 0.5, "y0": "1", "T": 100.0, "eps": 1e-5,
            "knot_rule": "1.5,0.05"},
}

_COMMON_DEFAULTS = {
    "problem": "poly", "q": 1, "tol": 1e-12, "max_iter": 200, "mu": 1.0, "k": 0.9,
    "a": -1.0, "samples": 1001, "points": 1000, "jobs": 1, "format": "csv",
}


class ConfigError(ValueError):
    pass


def load_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](val)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return out


def _add_common(p):
    p.add_argument("--config", help="flat key = value settings file")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--y0", help="weighted initial value, comma separated")
    p.add_argument("--T", dest="T", type=float, help="time horizon")
    p.add_argument("--eps", type=float, help="left end of the shifted domain")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--h", type=float, help="uniform knot size")
    grp.add_argument("--knot-rule", dest="knot_rule", metavar="C,H_MAX",
                     help="geometric knots with growth bound C and cap H_MAX")
    p.add_argument("--q", type=int, help="spline order")
    p.add_argument("--q-prime", dest="q_prime", type=int, help="integrand order")
    p.add_argument("--tol", type=float, help="Picard stopping tolerance")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--jobs", type=int, help="worker processes for sweeps")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hilfspline", description="Bernstein spline solver for Hilfer fractional IVPs"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one problem and export the solution")
    _add_common(ps)
    ps.add_argument("--problem", choices=("poly", "linear", "vdp"))
    ps.add_argument("--mu", type=float, help="Van der Pol damping")
    ps.add_argument("--k", type=float, help="exponent of the polynomial rhs t^k")
    ps.add_argument("--a", type=float, help="coefficient of the linear rhs a*x")
    ps.add_argument("--samples", type=int, help="trajectory sample count")

    pc = sub.add_parser("converge", help="convergence sweep on the polynomial problem")
    _add_common(pc)
    pc.add_argument("--sweep", choices=("h", "q", "eps"))
    pc.add_argument("--values", help="comma separated sweep values")
    pc.add_argument("--k", type=float, help="exponent of the polynomial rhs t^k")
    pc.add_argument("--points", type=int, help="error evaluation points")

    pp = sub.add_parser("compare-pc", help="predictor-corrector vs spline comparison")
    _add_common(pp)
    pp.add_argument("--values", help="comma separated knot sizes")
    pp.add_argument("--cap-iterations", dest="cap_iterations", nargs="?", const="default",
                    metavar="N1,N2,...", help="sweep capped Picard iteration counts")
    return parser


def _merge(args) -> dict:
    given = {k: v for k, v in vars(args).items() if v is not None}
    file_cfg = load_config_file(given["config"]) if "config" in given else {}
    problem = given.get("problem", file_cfg.get("problem", _COMMON_DEFAULTS["problem"]))
    if args.command == "converge":
        problem = "poly"
    elif args.command == "compare-pc":
        problem = "linear"
    if problem not in _PROBLEM_DEFAULTS:
        raise ConfigError(f"unknown problem {problem!r}")
    cfg = dict(_COMMON_DEFAULTS)
    cfg.update(_PROBLEM_DEFAULTS[problem])
    # --h and --knot-rule are alternatives, so one source's choice drops the other
    for src in (file_cfg, given):
        if "h" in src:
            cfg.pop("knot_rule", None)
        if "knot_rule" in src:
            cfg.pop("h", None)
        cfg.update(src)
    cfg["problem"] = problem
    cfg.pop("config", None)
    return cfg


def _floats(text, name):
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{name} must be a comma separated list of numbers") from None
    if not vals:
        raise ConfigError(f"{name} is empty")
    return vals


def _knot_rule(cfg):
    vals = _floats(cfg["knot_rule"], "knot-rule")
    if len(vals) != 2:
        raise ConfigError("knot-rule must be 'c,h_max'")
    return vals[0], vals[1]


def _problem_from(cfg):
    y0 = _floats(cfg["y0"], "y0")
    kind = cfg["problem"]
    if kind == "poly":
        if len(y0) != 1:
            raise ConfigError("the polynomial problem is scalar; give one y0 value")
        return ex.poly_problem(cfg["alpha"], cfg["beta"], cfg["k"], y0[0], cfg["T"], cfg["eps"])
    if kind == "linear":
        if len(y0) != 1:
            raise ConfigError("the linear problem is scalar; give one y0 value")
        eps = cfg["eps"] if cfg["beta"] < 1.0 or cfg["eps"] > 0 else 0.0
        return ex.linear_problem(cfg["alpha"], cfg["a"], y0[0], cfg["T"], cfg["beta"], eps)
    if cfg["alpha"] != 0.5:
        raise ConfigError("the Van der Pol system is built for alpha = 0.5")
    if len(y0) not in (1, 4):
        raise ConfigError("the Van der Pol system takes 1 or 4 y0 values")
    prob = ex.vdp_problem(cfg["beta"], cfg["mu"], cfg["T"], cfg["eps"], y0[0])
    if len(y0) == 4:
        prob = replace(prob, y0_tilde=np.asarray(y0))
    return prob


def _solver_config(cfg, kind):
    q = cfg["q"]
    q_prime = cfg.get("q_prime", 3 * q if kind == "vdp" else q)
    kw = {"q": q, "q_prime": q_prime, "eps_it": cfg["tol"], "max_iter": cfg["max_iter"]}
    if "knot_rule" in cfg:
        kw["knot_c"], kw["h_max"] = _knot_rule(cfg)
    return SolverConfig(**kw)


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def _dump_json(obj, path):
    text = json.dumps(obj, indent=1)
    if path:
        Path(path).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _reports_json(reports):
    return [
        {"param": r.param, "value": r.value, "mean_weighted_error": r.mean_weighted_error,
         "sup_weighted_error": r.sup_weighted_error, "total_time_s": r.wall_time_s,
         **{k: v for k, v in r.meta.items()}}
        for r in reports
    ]


def cmd_solve(cfg) -> int:
    prob = _problem_from(cfg)
    scfg = _solver_config(cfg, cfg["problem"])
    if "knot_rule" in cfg:
        knots = geometric_knots(prob.epsilon, prob.T, prob.gamma, scfg.knot_c, scfg.h_max)
    else:
        knots = uniform_knots(prob.epsilon, prob.T, cfg["h"])
    sol = solve(prob, scfg, knots)
    times = np.linspace(prob.epsilon, prob.T, cfg["samples"])
    states = eval_solution(sol, times)
    x_eps = float(states[0, 0])
    stats = (f"problem={prob.name} beta={prob.beta:g} knots={knots.n_intervals} "
             f"x_at_eps={x_eps:.6g} avg_iter_per_knot={sol.avg_iterations:.3f} "
             f"total_time_s={sol.wall_time:.3f}")
    out = cfg.get("out")
    if out:
        stem = Path(out)
        stem = stem.with_suffix("") if stem.suffix in (".json", ".csv") else stem
        Path(f"{stem}.json").write_text(json.dumps(sol.to_dict(), indent=1) + "\n")
        with open(f"{stem}.csv", "w", newline="") as fh:
            ex.trajectory_csv(times, states, fh)
        print(stats)
    elif cfg["format"] == "json":
        _dump_json(sol.to_dict(), None)
        print(stats, file=sys.stderr)
    else:
        ex.trajectory_csv(times, states, sys.stdout)
        print(stats, file=sys.stderr)
    return EXIT_OK


def cmd_converge(cfg) -> int:
    sweep = cfg.get("sweep", "h")
    if sweep not in ("h", "q", "eps"):
        raise ConfigError(f"sweep must be h, q or eps, got {sweep!r}")
    poly = {"alpha": cfg["alpha"], "beta": cfg["beta"], "k": cfg["k"],
            "y0": _floats(cfg["y0"], "y0")[0]}
    common = {"T": cfg["T"], "n_points": cfg["points"], "eps_it": cfg["tol"],
              "jobs": cfg["jobs"], **poly}
    values = _floats(cfg["values"], "values") if "values" in cfg else None
    h = cfg["h"] if cfg["_h_set"] else 0.5
    if sweep == "h":
        res = ex.run_convergence_h(values or ex.H_RANGE, q=cfg["q"], eps=cfg["eps"],
                                   q_prime=cfg.get("q_prime"), **common)
    elif sweep == "q":
        qs = [int(v) for v in values] if values else ex.Q_RANGE
        res = ex.run_convergence_q(qs, h=h, eps=cfg["eps"], **common)
    else:
        q = cfg["q"] if cfg["_q_set"] else 2
        res = ex.run_convergence_eps(values or ex.EPS_RANGE, q=q, h=h, **common)
    if cfg["format"] == "json":
        _dump_json({"sweep": sweep, "slope": res.slope, "rows": _reports_json(res.reports)},
                   cfg.get("out"))
    else:
        fh = _open_out(cfg.get("out"))
        try:
            ex.reports_to_csv(res.reports, fh, x_at_eps=sweep == "eps", knots=True,
                              avg_iter=True)
        finally:
            if fh is not sys.stdout:
                fh.close()
    axis = "log2(1/q)" if sweep == "q" else f"log2({sweep})"
    print(f"fitted slope of log2(mean error) vs {axis}: {res.slope:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_compare_pc(cfg) -> int:
    out = cfg.get("out")
    if "cap_iterations" in cfg:
        caps_arg = cfg["cap_iterations"]
        caps = ex.N_RANGE if caps_arg == "default" else [int(v) for v in _floats(caps_arg, "cap-iterations")]
        if any(n < 1 for n in caps):
            raise ConfigError("iteration caps must be >= 1")
        h = cfg["h"] if cfg["_h_set"] else 0.05
        reps = ex.run_iteration_cap(caps, h=h, T=cfg["T"], eps_it=cfg["tol"], jobs=cfg["jobs"])
        if cfg["format"] == "json":
            _dump_json(_reports_json(reps), out)
        else:
            fh = _open_out(out)
            try:
                ex.reports_to_csv(reps, fh, knots=True, avg_iter=True)
            finally:
                if fh is not sys.stdout:
                    fh.close()
        return EXIT_OK
    hs = _floats(cfg["values"], "values") if "values" in cfg else ex.H_RANGE
    pc, bs = ex.run_pc_comparison(hs, T=cfg["T"], eps_it=cfg["tol"], jobs=cfg["jobs"])
    if cfg["format"] == "json":
        _dump_json({"pc": _reports_json(pc), "bs": _reports_json(bs)}, out)
    elif out:
        stem = Path(out)
        stem = stem.with_suffix("") if stem.suffix == ".csv" else stem
        for tag, reps in (("pc", pc), ("bs", bs)):
            with open(f"{stem}_{tag}.csv", "w", newline="") as fh:
                ex.reports_to_csv(reps, fh, knots=True, avg_iter=tag == "bs")
    else:
        for tag, reps in (("PC", pc), ("BS", bs)):
            sys.stdout.write(f"# {tag}\n")
            ex.reports_to_csv(reps, sys.stdout, knots=True, avg_iter=tag == "BS")
    for p, b in zip(pc, bs):
        mark = "<" if b.mean_weighted_error < p.mean_weighted_error else ">="
        print(f"h={ex.fmt16(p.value)}: BS {b.mean_weighted_error:.4g} {mark} "
              f"PC {p.mean_weighted_error:.4g}", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {"solve": cmd_solve, "converge": cmd_converge, "compare-pc": cmd_compare_pc}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _merge(args)
        cfg.pop("verbose", None)
        # sweep commands pick their own h and q unless one was set explicitly
        explicit = {k for k, v in vars(args).items() if v is not None}
        if args.config:
            explicit |= set(load_config_file(args.config))
        cfg["_h_set"] = "h" in explicit
        cfg["_q_set"] = "q" in explicit
        if cfg["jobs"] < 1:
            raise ConfigError("jobs must be >= 1")
        return _COMMANDS[args.command](cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NonFiniteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
