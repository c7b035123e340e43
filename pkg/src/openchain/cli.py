"""Command-line front end: ``python -m openchain <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import bethe, ed, identities, scaling, thermo
from .params import BoundaryParamsSU2, BoundaryParamsSU3

SCHEMA_VERSION = 1
ALGEBRA_TOL = 1e-10
EINH_COLUMNS = ["model", "N", "param1", "param2", "param3", "E_true", "E_hom", "E_inh"]
SCAN_COLUMNS = ["sweep_param", "value", "E_b_analytic", "E_b_numeric", "abs_diff"]


class ConfigError(Exception):
    """Invalid command-line configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# --------------------------------------------------------------------------- output helpers

def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def render_json(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, sort_keys=False) + "\n"


def emit(text: str, out: str | None) -> None:
    """Write to ``out`` atomically (temp file + rename), or to stdout."""
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
        raise ConfigError(f"output directory is not writable: {directory}")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        if isinstance(exc, OSError):
            raise ConfigError(f"cannot write {out}: {exc}") from None
        raise


def table_or_json(args, header, rows, payload_key="rows", extra=None) -> str:
    if args.format == "json":
        records = [dict(zip(header, [_jsonable(x) for x in row])) for row in rows]
        return render_json({**(extra or {}), payload_key: records})
    return render_csv(header, rows)


def _jsonable(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


# --------------------------------------------------------------------------- config

def number(text: str) -> float:
    """Parse a real number, accepting fractions such as -25/8."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def number_list(text: str) -> list[float]:
    return [number(t) for t in text.split(",") if t.strip()]


def make_params(args, **override):
    vals = {k: getattr(args, k, None) for k in ("p", "q", "xi", "h", "hbar")}
    vals.update(override)
    try:
        if args.model == "su2":
            return BoundaryParamsSU2(vals["p"], vals["q"], vals["xi"])
        return BoundaryParamsSU3(vals["h"], vals["hbar"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def param_columns(params) -> list:
    if isinstance(params, BoundaryParamsSU2):
        return [params.p, params.q, params.xi]
    return [params.h, params.hbar, None]


def n_range(args, default=None) -> list[int]:
    if args.n is not None:
        if args.n < 1:
            raise ConfigError(f"N must be >= 1, got {args.n}")
        return [args.n]
    lo = args.nmin if args.nmin is not None else (default[0] if default else None)
    hi = args.nmax if args.nmax is not None else (default[1] if default else None)
    step = args.nstep if args.nstep is not None else (default[2] if default else 2)
    if lo is None or hi is None:
        raise ConfigError("give --n or both --nmin and --nmax")
    if step <= 0 or lo < 1 or hi < lo:
        raise ConfigError(f"invalid N range {lo}..{hi} step {step}")
    return list(range(lo, hi + 1, step))


def extrapolation_range(args, model: str, default=None) -> list[int]:
    """Chain lengths for a BST limit: at least four, and even for su3."""
    Ns = n_range(args, default=default)
    if len(Ns) < 4:
        raise ConfigError(f"extrapolation needs at least 4 chain lengths, got {len(Ns)}")
    if model == "su3" and any(N % 2 for N in Ns):
        raise ConfigError("su3 extrapolation needs even chain lengths")
    if args.method == "ed":
        check_ed_limit(model, Ns)
    return Ns


def check_ed_limit(model: str, Ns: Sequence[int]) -> None:
    limit = scaling.ED_LIMIT[model]
    big = [N for N in Ns if N > limit]
    if big:
        raise ConfigError(f"N={big[0]} is infeasible for exact diagonalization of {model} (limit N<={limit})")


def parallel_map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------- workers (top level for pickling)

def _scan_one(task):
    params, N, tol = task
    return scaling.einh_scan(params, [N], tol=tol)[0]


def _boundary_point(task):
    params, Ns, method, omega = task
    analytic = analytic_boundary_energy(params)
    try:
        numeric = scaling.boundary_energy_numeric(params, Ns, method=method, omega=omega).limit
    except (bethe.BetheConvergenceError, ed.LanczosError, ValueError):
        numeric = float("nan")
    return analytic, numeric


def analytic_boundary_energy(params) -> float:
    if isinstance(params, BoundaryParamsSU2):
        return thermo.boundary_energy_su2(params, method="quad")
    return thermo.boundary_energy_su3(params)


# --------------------------------------------------------------------------- subcommands

def cmd_verify_algebra(args) -> int:
    r = identities._default_r
    if args.corrupt_r:
        def r(u, n):  # noqa: F811 - negative control
            out = identities._default_r(u, n)
            out[0, 1] += 1e-3
            return out
    worst = identities.verify_all(samples=args.samples, r=r)
    rows = [[name, value, "ok" if value < ALGEBRA_TOL else "FAIL"] for name, value in worst.items()]
    emit(table_or_json(args, ["identity", "max_residual", "status"], rows), args.out)
    return 0 if all(v < ALGEBRA_TOL for v in worst.values()) else 1


def cmd_ed(args) -> int:
    params = make_params(args)
    Ns = n_range(args)
    check_ed_limit(args.model, Ns)
    rows = [[args.model, N, *param_columns(params), scaling.exact_energy(params, N, tol=args.tol)] for N in Ns]
    emit(table_or_json(args, ["model", "N", "param1", "param2", "param3", "E_true"], rows), args.out)
    return 0


def cmd_bethe_solve(args) -> int:
    params = make_params(args)
    if args.n is None:
        raise ConfigError("bethe-solve needs --n")
    N = args.n
    if args.model == "su3" and N % 2:
        raise ConfigError("su3 bethe-solve needs an even N")
    try:
        energy, state = scaling.homogeneous_energy(params, N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if isinstance(state, bethe.BetheStateSU2):
        levels = [(1, state.mu, state.quantum_numbers)]
    else:
        levels = [(1, state.mu1, state.I), (2, state.mu2, state.J)]
    if args.format == "json":
        payload = {"model": args.model, "N": N, "params": param_columns(params), "energy": energy,
                   "residual": state.residual, "iterations": state.iterations,
                   "levels": [{"level": lv, "mu": [float(x) for x in mu],
                               "quantum_numbers": [int(x) for x in qn]} for lv, mu, qn in levels]}
        emit(render_json(payload), args.out)
    else:
        rows = [[lv, int(qn[k]), mu[k]] for lv, mu, qn in levels for k in range(len(mu))]
        text = render_csv(["level", "quantum_number", "mu"], rows)
        emit(text, args.out)
        print(f"E_hom={fmt(energy)}", file=sys.stderr)
    return 0


def scan_rows(records) -> list[list]:
    return [[r.model, r.N, *param_columns(r.params), r.E_true, r.E_hom, r.E_inh] for r in records]


def run_scan(params, Ns, args):
    model = scaling.model_tag(params)
    check_ed_limit(model, Ns)
    if any(N % 2 for N in Ns):
        raise ConfigError("E_inh scans need even N")
    return parallel_map(_scan_one, [(params, N, args.tol) for N in Ns], args.jobs)


def cmd_einh_scan(args) -> int:
    params = make_params(args)
    Ns = n_range(args)
    records = run_scan(params, Ns, args)
    emit(table_or_json(args, EINH_COLUMNS, scan_rows(records), "records"), args.out)
    return 0 if all(r.error is None for r in records) else 1


def read_scan_csv(path: str) -> tuple[list[int], list[float]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or "E_inh" not in rows[0]:
        raise ConfigError(f"{path} is not an einh-scan table")
    pairs = [(int(r["N"]), float(r["E_inh"])) for r in rows if r["E_inh"] != ""]
    return [n for n, _ in pairs], [e for _, e in pairs]


def fit_payload(fit: scaling.PowerLawFit) -> dict:
    return {"gamma": fit.gamma, "beta": fit.beta, "r_squared": fit.r_squared,
            "n_points": fit.n_points, "n_min": fit.n_min, "n_max": fit.n_max}


def cmd_fit(args) -> int:
    Ns, E = read_scan_csv(args.input)
    try:
        fit = scaling.power_law_fit(N=Ns, E_inh=E)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    emit(render_json(fit_payload(fit)), args.out)
    return 0


def cmd_boundary_energy(args) -> int:
    params = make_params(args)
    try:
        if isinstance(params, BoundaryParamsSU2):
            analytic = thermo.boundary_energy_su2(params, method="quad")
            closed = thermo.boundary_energy_su2(params, method="digamma")
        else:
            analytic = thermo.boundary_energy_su3(params)
            closed = None
    except thermo.RegimeError as exc:
        raise ConfigError(str(exc)) from None
    header = ["model", "param1", "param2", "param3", "E_b_analytic", "E_b_closed_form",
              "E_b_numeric", "numeric_error"]
    numeric = err = None
    if args.nmin is not None or args.n is not None:
        Ns = extrapolation_range(args, args.model)
        res = scaling.boundary_energy_numeric(params, Ns, method=args.method, omega=args.omega)
        numeric, err = res.limit, res.error
    rows = [[args.model, *param_columns(params), analytic, closed, numeric, err]]
    emit(table_or_json(args, header, rows, "results"), args.out)
    return 0


def boundary_scan_rows(base_args, sweep: str, values: Sequence[float], Ns, method, omega, jobs):
    tasks = []
    for v in values:
        params = make_params(base_args, **{sweep: v})
        try:
            analytic_boundary_energy(params)
        except thermo.RegimeError as exc:
            raise ConfigError(f"{sweep}={v}: {exc}") from None
        tasks.append((params, Ns, method, omega))
    results = parallel_map(_boundary_point, tasks, jobs)
    return [[sweep, v, a, n, abs(a - n) if math.isfinite(n) else None] for v, (a, n) in zip(values, results)]


def cmd_boundary_scan(args) -> int:
    if args.sweep is None or not args.values:
        raise ConfigError("boundary-scan needs --sweep and --values")
    allowed = ("p", "q", "xi") if args.model == "su2" else ("h", "hbar")
    if args.sweep not in allowed:
        raise ConfigError(f"--sweep must be one of {','.join(allowed)} for {args.model}")
    Ns = extrapolation_range(args, args.model, default=_default_boundary_range(args.model))
    rows = boundary_scan_rows(args, args.sweep, args.values, Ns, args.method, args.omega, args.jobs)
    emit(table_or_json(args, SCAN_COLUMNS, rows), args.out)
    return 0


def cmd_density(args) -> int:
    us = args.u if args.u else [0.0]
    if args.model == "su2":
        closed = thermo.density_su2_closed(us)
        prof = thermo.density_su2()
    else:
        closed = thermo.density_su3_closed(us)
        prof = thermo.density_su3()
    numeric = np.interp(us, prof.u, prof.rho)
    rows = [[u, c, n] for u, c, n in zip(us, closed, numeric)]
    emit(table_or_json(args, ["u", "rho_closed_form", "rho_integral_equation"], rows), args.out)
    return 0


def _default_boundary_range(model):
    return (32, 256, 32) if model == "su2" else (14, 122, 6)


FIG1 = {"a": 1 / 8, "b": 5 / 8, "c": 25 / 8}
FIG2 = {"a": ("xi", dict(p=8.0, q=4.0), [-4.0, -3.125, -2.0, -1.0, 0.0, 1.0, 2.0, 3.125, 4.0]),
        "b": ("p", dict(q=4.0, xi=-25 / 8), [1.0, 2.0, 4.0, 6.0, 8.0, 10.0]),
        "c": ("q", dict(p=8.0, xi=-25 / 8), [2.0, 3.0, 4.0, 6.0, 8.0, 10.0])}
FIG3 = {"a": -1 / 63, "b": -1 / 13, "c": -1 / 3}
FIG4 = {"a": ("hbar", dict(h=1.2), [-0.9, -0.7, -1 / 3, -0.2, -1 / 13, -1 / 63]),
        "b": ("h", dict(hbar=-1 / 13), [0.2, 0.5, 0.8, 1.2, 1.5, 1.8])}


def cmd_reproduce(args) -> int:
    fig = args.figure
    table = {1: FIG1, 2: FIG2, 3: FIG3, 4: FIG4}[fig]
    panels = [args.panel] if args.panel else sorted(table)
    if any(p not in table for p in panels):
        raise ConfigError(f"figure {fig} has panels {','.join(sorted(table))}")
    if fig in (1, 3):
        return _reproduce_einh(args, fig, panels)
    return _reproduce_boundary(args, fig, panels)


def _reproduce_einh(args, fig, panels) -> int:
    model = "su2" if fig == 1 else "su3"
    Ns = n_range(args, default=(6, 16, 2) if fig == 1 else (2, 10, 2))
    runs = []
    for panel in panels:
        if fig == 1:
            plist = [BoundaryParamsSU2(_given(args.p, 8.0), _given(args.q, 4.0), _given(args.xi, FIG1[panel]))]
        else:
            hs = [args.h] if args.h is not None else [0.5, 1.2]
            plist = [BoundaryParamsSU3(h, _given(args.hbar, FIG3[panel])) for h in hs]
        for params in plist:
            records = run_scan(params, Ns, args)
            try:
                fit = fit_payload(scaling.power_law_fit(records))
            except ValueError as exc:
                fit = {"error": str(exc)}
            runs.append((panel, params, records, fit))
    if args.format == "json":
        payload = {"figure": fig, "model": model, "panels": [
            {"panel": panel, "params": param_columns(params),
             "records": [dict(zip(EINH_COLUMNS, row)) for row in scan_rows(records)], "fit": fit}
            for panel, params, records, fit in runs]}
        emit(render_json(payload), args.out)
    else:
        rows = [row for _, _, records, _ in runs for row in scan_rows(records)]
        emit(render_csv(EINH_COLUMNS, rows), args.out)
        for panel, params, _, fit in runs:
            print(json.dumps({"panel": panel, "params": param_columns(params), "fit": fit}), file=sys.stderr)
    return 0


def _reproduce_boundary(args, fig, panels) -> int:
    model = "su2" if fig == 2 else "su3"
    table = FIG2 if fig == 2 else FIG4
    Ns = extrapolation_range(args, model, default=_default_boundary_range(model))
    rows = []
    for panel in panels:
        sweep, fixed, values = table[panel]
        base = argparse.Namespace(model=model, **{k: None for k in ("p", "q", "xi", "h", "hbar")})
        for k, v in fixed.items():
            setattr(base, k, _given(getattr(args, k), v))
        if getattr(args, "values", None):
            values = args.values
        rows.extend([panel, *r] for r in boundary_scan_rows(base, sweep, values, Ns, args.method,
                                                            args.omega, args.jobs))
    emit(table_or_json(args, ["panel", *SCAN_COLUMNS], rows, extra={"figure": fig}), args.out)
    return 0


def _given(value, default):
    return default if value is None else value


# --------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="openchain", description=__doc__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, params=True, nrange=True):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--tol", type=float, default=1e-10, help="Lanczos residual tolerance")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        if params:
            p.add_argument("--model", choices=("su2", "su3"), default="su2")
            p.add_argument("--p", type=number)
            p.add_argument("--q", type=number)
            p.add_argument("--xi", type=number)
            p.add_argument("--h", type=number)
            p.add_argument("--hbar", type=number)
        if nrange:
            p.add_argument("--n", type=int)
            p.add_argument("--nmin", type=int)
            p.add_argument("--nmax", type=int)
            p.add_argument("--nstep", type=int)
            p.add_argument("--method", choices=("bethe", "ed"), default="bethe")
            p.add_argument("--omega", type=float, default=1.0, help="BST exponent")

    p = sub.add_parser("verify-algebra", help="check the Yang-Baxter and reflection identities")
    common(p, params=False, nrange=False)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--corrupt-r", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify_algebra)

    p = sub.add_parser("ed", help="ground-state energy by Lanczos")
    common(p)
    p.set_defaults(func=cmd_ed)

    p = sub.add_parser("bethe-solve", help="homogeneous Bethe roots of the ground state")
    common(p)
    p.set_defaults(func=cmd_bethe_solve)

    p = sub.add_parser("einh-scan", help="E_inh = E_hom - E_true over a range of N")
    common(p)
    p.set_defaults(func=cmd_einh_scan)

    p = sub.add_parser("fit", help="power-law fit of an einh-scan CSV")
    common(p, params=False, nrange=False)
    p.add_argument("input", help="CSV written by einh-scan")
    p.set_defaults(func=cmd_fit, format="json")

    p = sub.add_parser("boundary-energy", aliases=["boundary"], help="analytic (and numeric) boundary energy")
    common(p)
    p.set_defaults(func=cmd_boundary_energy)

    p = sub.add_parser("boundary-scan", help="boundary energy along one parameter")
    common(p)
    p.add_argument("--sweep", choices=("p", "q", "xi", "h", "hbar"))
    p.add_argument("--values", type=number_list)
    p.set_defaults(func=cmd_boundary_scan)

    p = sub.add_parser("density", help="bulk root density at given points")
    common(p, nrange=False)
    p.add_argument("--u", type=number, action="append", help="evaluation point (repeatable)")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("reproduce", help="tables behind the figures")
    common(p)
    p.add_argument("figure", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--panel")
    p.add_argument("--values", type=number_list, help="override the sweep values (figures 2, 4)")
    p.set_defaults(func=cmd_reproduce)
    return parser


def _fill_defaults(args) -> None:
    if getattr(args, "model", None) is None or args.command == "reproduce":
        return
    defaults = {"su2": dict(p=8.0, q=4.0, xi=0.0), "su3": dict(h=1.2, hbar=-1 / 13)}[args.model]
    for k, v in defaults.items():
        if getattr(args, k) is None:
            setattr(args, k, v)
    foreign = ("h", "hbar") if args.model == "su2" else ("p", "q", "xi")
    given = [k for k in foreign if getattr(args, k) is not None]
    if given:
        raise ConfigError(f"--{given[0]} does not apply to {args.model}")


_NEGATIVE = re.compile(r"^-\.?\d")


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Rewrite ``--opt -1/13`` as ``--opt=-1/13``.

    argparse takes anything that starts with a dash and is not a plain negative
    decimal for an option flag, which rejects fractions and value lists.
    """
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = _attach_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        _fill_defaults(args)
        if getattr(args, "jobs", 1) < 1:
            raise ConfigError("--jobs must be >= 1")
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "invalid_config", "message": str(exc)}), file=sys.stderr)
        return 2
    except (bethe.BetheConvergenceError, ed.LanczosError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"error": "solver_failure", "message": str(exc)}), file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
