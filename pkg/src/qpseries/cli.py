"""
Command line front end.

    qpseries diagnose --config problem.toml --out runs/
    qpseries solve --config problem.toml --out runs/ --order 8
    qpseries oracle --config problem.toml --out runs/
    qpseries attract --config problem.toml --out runs/
    qpseries residual-sweep --config problem.toml --out runs/ --eps-list 0.01,0.02,0.05

Exit codes: 0 success, 2 bad config, 3 solver error, 4 verification failure.

Config file (TOML)::

    omega = [1.0]
    epsilon = 0.05

    [[forcing]]           # one table per nonzero Fourier coefficient
    nu = [1]
    re = 0.5
    im = 0.0

    [g]
    c0 = 0.0
    coeffs = [0.0, 1.0, 1.0]   # g(x) = sum coeffs[j] x**j

    [solver]              # every key optional
    order = 8             # truncation order K
    k_max = 5             # oracle order
    n_max = 4             # diagnose range
    budget = 10000000     # lattice points (diagnose) / trees (oracle)
    t_end = 100.0
    dt = 0.01
    offsets = [0.01, 0.05, 0.1]
    eps_list = [0.01, 0.05]
    orders = [4, 8]
    residual_bound = 1e-9
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import tomli

from . import frequency, solver_n1, solver_n3, trees, verify
from .errors import BudgetExceeded, QPSeriesError, ValidationError, VerificationError
from .fourier import FourierSeries
from .model import Problem, validate

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4

TOP_KEYS = {"omega", "epsilon", "forcing", "g", "solver"}
FORCING_KEYS = {"nu", "re", "im"}
G_KEYS = {"c0", "coeffs"}
SOLVER_DEFAULTS = {
    "order": 8, "k_max": 5, "n_max": 4, "budget": None, "t_end": 100.0, "dt": None,
    "offsets": [0.01, 0.05, 0.1], "eps_list": None, "orders": [4, 8], "residual_bound": None,
}


class ConfigError(Exception):
    pass


def _fmt(x) -> str:
    if x is None:
        return '"none"'
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, complex):
        return f"[{_fmt(x.real)}, {_fmt(x.imag)}]"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return '"' + str(x) + '"'


def _report_text(sections: dict) -> str:
    buf = io.StringIO()
    for name, body in sections.items():
        buf.write(f"[{name}]\n")
        for key, value in body.items():
            buf.write(f"{key} = {_fmt(value)}\n")
        buf.write("\n")
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def load_config(path) -> tuple[Problem, dict]:
    """Parse a TOML problem file into a ``Problem`` and solver options."""
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    unknown = set(data) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown field(s): {sorted(unknown)}")
    for key in ("omega", "forcing", "g"):
        if key not in data:
            raise ConfigError(f"missing field: {key}")
    g = data["g"]
    if set(g) - G_KEYS or "coeffs" not in g:
        raise ConfigError(f"[g] takes exactly {sorted(G_KEYS)}")
    records = data["forcing"]
    if not isinstance(records, list):
        raise ConfigError("forcing must be an array of tables")
    for r in records:
        if set(r) - FORCING_KEYS or "nu" not in r:
            raise ConfigError(f"forcing entries take {sorted(FORCING_KEYS)}")
    solver = dict(SOLVER_DEFAULTS)
    extra = set(data.get("solver", {})) - set(SOLVER_DEFAULTS)
    if extra:
        raise ConfigError(f"unknown solver field(s): {sorted(extra)}")
    solver.update(data.get("solver", {}))
    try:
        omega = np.asarray(data["omega"], dtype=float)
        forcing = FourierSeries.from_records(records, dim=omega.shape[0], declared_real=True)
        problem = Problem.build(omega, forcing, g["coeffs"], g.get("c0", 0.0),
                                float(data.get("epsilon", 0.0)))
    except (TypeError, ValueError, QPSeriesError) as exc:
        raise ConfigError(f"invalid problem data: {exc}") from exc
    return problem, solver


def _solve(problem: Problem, K: int):
    if validate(problem).gotn == 1:
        return solver_n1.solve(problem, K), None
    return solver_n3.solve(problem, K)


def cmd_diagnose(problem: Problem, opts: dict, out: Path) -> int:
    support = [nu for nu, _ in problem.forcing.items()]
    budget = opts["budget"] or frequency.DEFAULT_BUDGET
    rep = frequency.diagnose(problem.omega, support, int(opts["n_max"]), budget=budget)
    body = rep.as_dict()
    body["alpha_minimizers"] = [list(m) for m in rep.minimizers]
    _atomic_write(out / "diagnose.txt", _report_text({"diagnose": body}))
    return EXIT_OK


def cmd_solve(problem: Problem, opts: dict, out: Path) -> int:
    K = int(opts["order"])
    report = validate(problem)
    sol, state = _solve(problem, K)
    res = verify.residual(problem, sol)
    rows = [(r["k"], " ".join(map(str, r["nu"])), r["re"], r["im"]) for r in sol.to_records()]
    _atomic_write(out / "coefficients.txt", _csv_text(["k", "nu", "re", "im"], rows))
    scalars = {"gotn": report.gotn, "a": report.a, "N": report.N, "solver": report.solver,
               "epsilon": problem.epsilon, "K": K, "c0": problem.nonlinearity.c0,
               "mu_radius_estimate": sol.mu_radius_estimate,
               "radius_warning": sol.radius_warning}
    sections = {"solution": scalars}
    if state is not None:
        sections["counterterm"] = state.report()
    _atomic_write(out / "report.txt", _report_text(sections))
    bound = opts["residual_bound"]
    resid = {"grid_size": res.grid_size, "sup_residual": res.sup_residual,
             "fourier_sup": res.fourier_sup, "residual_bound": bound}
    _atomic_write(out / "residual.txt", _report_text({"residual": resid}))
    if bound is not None and res.sup_residual > float(bound):
        return EXIT_VERIFY
    return EXIT_OK


def cmd_oracle(problem: Problem, opts: dict, out: Path) -> int:
    k_max = int(opts["k_max"])
    scheme = "n1" if validate(problem).gotn == 1 else "n3"
    budget = opts["budget"] or trees.DEFAULT_TREE_BUDGET
    if problem.epsilon == 0:
        raise ValidationError("the oracle needs eps != 0")
    if scheme == "n1":
        output = solver_n1.solve(problem, k_max)
    else:
        output = solver_n3.solve_zeta(problem, k_max)
    cmp = trees.oracle_compare(scheme, k_max, problem, output, budget=budget)
    lem = trees.check_lemmas(scheme, k_max, problem, budget=budget)
    sections = {
        "oracle": {"scheme": scheme, "k_max": k_max, "tolerance": cmp.tolerance,
                   "max_discrepancy": cmp.max_discrepancy, "passed": cmp.passed},
        "oracle.orders": {f"k{k}": [cmp.discrepancy[k], cmp.n_trees[k]] for k in cmp.discrepancy},
        "lemmas": {"trees_checked": lem.trees_checked, "passed": lem.passed,
                   **{f'"{k}"': v for k, v in lem.violations.items()}},
    }
    _atomic_write(out / "oracle.txt", _report_text(sections))
    return EXIT_OK if cmp.passed and lem.passed else EXIT_VERIFY


def cmd_attract(problem: Problem, opts: dict, out: Path) -> int:
    sol, _ = _solve(problem, int(opts["order"]))
    rep = verify.attractor_test(problem, sol, opts["offsets"], t_end=float(opts["t_end"]),
                                dt=opts["dt"])
    for i, rec in enumerate(rep.trajectories):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "v", "distance"])
        for t, (x, v), d in zip(rec.times, rec.states, rec.distance_to_solution):
            w.writerow([_fmt(t), _fmt(x), _fmt(v), _fmt(d)])
        _atomic_write(out / f"trajectory_{i:02d}.csv", buf.getvalue())
    body = {"t_end": rep.t_end, "threshold": rep.threshold, "exploratory": rep.exploratory,
            "offsets": rep.offsets, "terminal_distance": rep.terminal_distance,
            "decay_rates": rep.decay_rates, "passed": rep.passed}
    _atomic_write(out / "attract.txt", _report_text({"attract": body}))
    return EXIT_OK if rep.passed else EXIT_VERIFY


def cmd_residual_sweep(problem: Problem, opts: dict, out: Path) -> int:
    eps_list = opts["eps_list"] or [problem.epsilon]
    if not eps_list:
        raise ConfigError("empty eps list")
    rows = verify.residual_sweep(problem, eps_list, opts["orders"])
    text = _csv_text(["epsilon", "K", "sup_residual"],
                     [(r["epsilon"], r["K"], r["sup_residual"]) for r in rows])
    _atomic_write(out / "residual_sweep.csv", text)
    return EXIT_OK


COMMANDS = {
    "diagnose": cmd_diagnose,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "attract": cmd_attract,
    "residual-sweep": cmd_residual_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpseries", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--order", type=int)
        p.add_argument("--budget", type=int)
        p.add_argument("--eps-list", type=str)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        problem, opts = load_config(args.config)
        if args.order is not None:
            opts["order"] = opts["k_max"] = args.order
        if args.budget is not None:
            opts["budget"] = args.budget
        if args.eps_list:
            try:
                opts["eps_list"] = [float(x) for x in args.eps_list.split(",") if x.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --eps-list: {exc}") from exc
        validate(problem)
    except (ConfigError, ValidationError) as exc:
        print(f"qpseries: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](problem, opts, args.out)
    except ConfigError as exc:
        print(f"qpseries: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationError as exc:
        print(f"qpseries: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (QPSeriesError, BudgetExceeded, ArithmeticError) as exc:
        print(f"qpseries: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
