"""Command-line entry point: ``sbi-radial {field,solve,scan,diagnose}``.

Exit codes: 0 success, 2 parse/I-O error, 3 parameter validation, 4 solver
did not converge, 5 Nehari projection failed, 6 a scan violated the
monotonicity invariant.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .diagnostics import run_all
from .errors import InvalidFieldError, InvalidGridError, ParameterError, ProjectionError, SBIError
from .field import solve_field, write_field_solution
from .functional import DEFAULT_Q, ModelParams
from .grid import atomic_write_text, read_field_csv
from .groundstate import (
    LevelCurve,
    find_ground_state,
    geometry_scan,
    seed_profile,
    write_geometry_scan,
    write_ground_state,
    write_level_curve,
)
from .profiles import gaussian

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_NONCONV, EXIT_PROJECTION, EXIT_SCAN = 0, 2, 3, 4, 5, 6

log = logging.getLogger("sbi_radial")

# config-file keys (flag names with '-' -> '_') and the ModelParams field they feed
PARAM_KEYS = {
    "p": "p",
    "lambda": "lam",
    "rmax": "r_max",
    "n": "n",
    "tol_grad": "tol_grad",
    "tol_nehari": "tol_nehari",
    "max_iter": "max_iter",
}
DEFAULTS = {"out": "out", "p": 3.0, "lambda": 1.0, "rmax": 30.0, "n": 4096, "tol_grad": 1e-6, "tol_nehari": 1e-8, "max_iter": 2000}


class CLIError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _add_model_flags(sp: argparse.ArgumentParser, with_lambda: bool = True) -> None:
    sp.add_argument("--p", type=float, help="nonlinearity exponent (default 3)")
    if with_lambda:
        sp.add_argument("--lambda", dest="lambda", type=float, help="perturbation parameter in [1/2, 1] (default 1)")
    sp.add_argument("--rmax", type=float, help="truncation radius (default 30)")
    sp.add_argument("--n", type=int, help="number of grid intervals (default 4096)")
    sp.add_argument("--tol-grad", dest="tol_grad", type=float, help="relative H^1 gradient tolerance (default 1e-6)")
    sp.add_argument("--tol-nehari", dest="tol_nehari", type=float, help="relative Nehari tolerance (default 1e-8)")
    sp.add_argument("--max-iter", dest="max_iter", type=int, help="descent iteration cap (default 2000)")
    sp.add_argument("--config", type=Path, help="JSON file with the same keys as the flags; flags win")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="output directory (default ./out)")
    common.add_argument("-v", "--verbose", action="store_true", default=None)
    ap = argparse.ArgumentParser(prog="sbi-radial", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("field", parents=[common], help="Born-Infeld potential of a density given as u.csv")
    f.add_argument("input", type=Path)
    f.add_argument("--inline", action="store_true", help="embed arrays in the JSON instead of CSV files")

    d = sub.add_parser("diagnose", parents=[common], help="run the invariant checklist on u.csv")
    d.add_argument("input", type=Path)
    d.add_argument("--critical", action="store_true", help="gate the Pohozaev check")
    d.add_argument("--seed", type=int, default=42)
    _add_model_flags(d)

    s = sub.add_parser("solve", parents=[common], help="compute a radial ground state")
    _add_model_flags(s)
    s.add_argument("--seed-profile", choices=("gaussian", "shifted", "ring"), default=None)

    c = sub.add_parser("scan", parents=[common], help="lambda continuation, p sweep or ray geometry")
    c.add_argument("--mode", choices=("lambda", "p", "geometry"), required=True)
    _add_model_flags(c)
    c.add_argument("--from", dest="start", type=float, help="first grid value (lambda/p modes)")
    c.add_argument("--to", dest="stop", type=float, help="last grid value (lambda/p modes)")
    c.add_argument("--steps", type=int, help="number of grid points (default 5; 200 for geometry)")
    c.add_argument("--tmin", type=float, default=1e-2, help="first ray scale (geometry mode)")
    c.add_argument("--tmax", type=float, default=100.0, help="last ray scale (geometry mode)")
    c.add_argument("--q", type=float, default=DEFAULT_Q, help="interpolation exponent (geometry mode)")
    c.add_argument("--jobs", type=int, default=1, help="parallel workers for independent scan points")
    c.add_argument("--resume", action="store_true", help="reuse per-point results already in --out")
    c.add_argument("--seed-profile", choices=("gaussian", "shifted", "ring"), default=None)
    return ap


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise CLIError(f"cannot read config {path}: {exc}", EXIT_PARSE) from None
    except json.JSONDecodeError as exc:
        raise CLIError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})", EXIT_PARSE) from None
    if not isinstance(data, dict):
        raise CLIError(f"{path}: top level must be an object", EXIT_PARSE)
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < flags for every command option."""
    config = _load_config(getattr(args, "config", None))
    merged = dict(DEFAULTS)
    merged.update(config)
    for key, value in vars(args).items():
        if value is not None and key != "config":
            merged[key] = value
    return merged


def params_from(settings: dict) -> ModelParams:
    try:
        kwargs = {field: settings[key] for key, field in PARAM_KEYS.items()}
        kwargs["n"] = int(kwargs["n"]) if float(kwargs["n"]).is_integer() else kwargs["n"]
        kwargs["max_iter"] = int(kwargs["max_iter"])
        for k in ("p", "lam", "r_max", "tol_grad", "tol_nehari"):
            kwargs[k] = float(kwargs[k])
        return ModelParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise CLIError(f"invalid parameters: {exc}", EXIT_VALIDATION) from None


def _read_input(path: Path):
    try:
        return read_field_csv(path)
    except FileNotFoundError:
        raise CLIError(f"{path}: no such file", EXIT_PARSE) from None
    except (InvalidGridError, InvalidFieldError) as exc:
        raise CLIError(f"{path}: {exc}", EXIT_VALIDATION) from None
    except (OSError, ValueError) as exc:
        raise CLIError(str(exc), EXIT_PARSE) from None


def cmd_field(args, settings) -> int:
    u = _read_input(args.input)
    sol = solve_field(u)
    path = write_field_solution(sol, settings["out"], inline=args.inline)
    print(f"wrote {path}")
    return EXIT_OK


def cmd_diagnose(args, settings) -> int:
    u = _read_input(args.input)
    params = params_from({**settings, "rmax": u.grid.r_max, "n": u.grid.n})
    report = run_all(u, params, critical=args.critical, seed=args.seed)
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "diagnostics.json", report.to_json())
    print(report.table())
    return EXIT_OK


def cmd_solve(args, settings) -> int:
    params = params_from(settings)
    seed = seed_profile(settings.get("seed_profile") or "gaussian", params.grid())
    try:
        res = find_ground_state(params, seed=seed)
    except ProjectionError as exc:
        raise CLIError(f"Nehari projection failed: {exc}", EXIT_PROJECTION) from None
    out = Path(settings["out"])
    path = write_ground_state(res, out)
    report = run_all(res.u, params, critical=res.converged)
    atomic_write_text(out / "diagnostics.json", report.to_json())
    print(report.table())
    print(
        f"value={res.value:.12g} iterations={res.iterations} nehari_rel={res.nehari_relative:.3e} "
        f"pohozaev_rel={res.pohozaev_relative:.3e} grad_rel={res.grad_relative:.3e}"
    )
    print(f"wrote {path}")
    if not res.converged:
        print(f"not converged after {res.iterations} iterations", file=sys.stderr)
        return EXIT_NONCONV
    return EXIT_OK


def _record(res) -> dict:
    return {
        "level": res.value if res.converged else None,
        "iterations": res.iterations,
        "status": "converged" if res.converged else "not converged",
        "pohozaev_relative": res.pohozaev_relative,
        "nehari_relative": res.nehari_relative,
    }


def _solve_point(params: ModelParams, seed_name: str) -> dict:
    """One scan point as a JSON-ready record.  Top level so workers can pickle it."""
    try:
        return _record(find_ground_state(params, seed=seed_profile(seed_name, params.grid())))
    except SBIError as exc:
        return {"level": None, "iterations": 0, "status": f"failed: {exc}"}


def _scan_grid(settings) -> np.ndarray:
    steps = settings.get("steps") or 5
    if steps < 3:
        raise CLIError("a scan needs at least 3 grid points", EXIT_VALIDATION)
    if settings.get("start") is None or settings.get("stop") is None:
        raise CLIError("--from and --to are required for this mode", EXIT_VALIDATION)
    if not settings["stop"] > settings["start"]:
        raise CLIError("--to must exceed --from", EXIT_VALIDATION)
    return np.linspace(settings["start"], settings["stop"], steps)


def _run_points(points: list[tuple[str, ModelParams]], settings, warm: bool) -> list[dict]:
    """Solve every scan point, writing ``points/<name>.json`` as each finishes."""
    pdir = Path(settings["out"]) / "points"
    pdir.mkdir(parents=True, exist_ok=True)
    seed_name = settings.get("seed_profile") or "gaussian"
    records: dict[str, dict] = {}
    todo = []
    for name, params in points:
        path = pdir / f"{name}.json"
        if settings.get("resume") and path.exists():
            records[name] = json.loads(path.read_text())
        else:
            todo.append((name, params))

    def store(name, rec):
        records[name] = rec
        atomic_write_text(pdir / f"{name}.json", json.dumps(rec, indent=2, allow_nan=False))

    jobs = settings.get("jobs") or 1
    if warm and jobs == 1:
        current = None
        for name, params in todo:
            try:
                res = find_ground_state(params, seed=current if current is not None else seed_profile(seed_name, params.grid()))
            except SBIError as exc:
                store(name, {"level": None, "iterations": 0, "status": f"failed: {exc}"})
                continue
            current = res.u
            store(name, _record(res))
    elif jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {name: pool.submit(_solve_point, params, seed_name) for name, params in todo}
            for name, fut in futures.items():
                store(name, fut.result())
    else:
        for name, params in todo:
            store(name, _solve_point(params, seed_name))
    return [records[name] for name, _ in points]


def cmd_scan(args, settings) -> int:
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    base = params_from(settings)
    mode = settings["mode"]

    if mode == "geometry":
        steps = settings.get("steps") or 200
        if steps < 3:
            raise CLIError("a scan needs at least 3 grid points", EXIT_VALIDATION)
        if not 0 < settings["tmin"] < settings["tmax"]:
            raise CLIError("need 0 < --tmin < --tmax", EXIT_VALIDATION)
        t = np.geomspace(settings["tmin"], settings["tmax"], steps)
        u = gaussian(base.grid())
        try:
            scan = geometry_scan(u, base, t, q=settings["q"])
        except SBIError as exc:
            raise CLIError(str(exc), EXIT_VALIDATION) from None
        write_geometry_scan(scan, out / "geometry.csv")
        meta = {
            "p": base.p,
            "lambda": base.lam,
            "q": settings["q"],
            "exponent": scan.exponent,
            "c1": scan.c1,
            "c2": scan.c2,
            "c3": scan.c3,
            "first_negative": scan.first_negative,
            "status": "sign change found" if scan.found else "not found",
        }
        atomic_write_text(out / "geometry.json", json.dumps(meta, indent=2, allow_nan=False))
        print(json.dumps(meta, indent=2))
        return EXIT_OK

    grid_values = _scan_grid(settings)
    if mode == "lambda":
        try:
            points = [(f"lambda_{v:.6g}", base.with_(lam=float(v))) for v in grid_values]
        except ParameterError as exc:
            raise CLIError(str(exc), EXIT_VALIDATION) from None
        records = _run_points(points, settings, warm=True)
        levels = np.array([np.nan if r["level"] is None else r["level"] for r in records])
        curve = LevelCurve(grid_values, levels, np.array([r["iterations"] for r in records]), [r["status"] for r in records])
        write_level_curve(curve, out / "level_curve.csv")
        for lam, rec in zip(grid_values, records):
            print(f"lambda={lam:.6g} level={rec['level']} status={rec['status']}")
        bad = curve.violations()
        if bad:
            for i in bad:
                print(f"monotonicity violated after lambda={grid_values[i]:.6g}", file=sys.stderr)
            return EXIT_SCAN
        return EXIT_OK

    # p sweep
    try:
        points = [(f"p_{v:.6g}", base.with_(p=float(v))) for v in grid_values]
    except ParameterError as exc:
        raise CLIError(str(exc), EXIT_VALIDATION) from None
    records = _run_points(points, settings, warm=False)
    lines = ["p,level,iterations,status"]
    for p, rec in zip(grid_values, records):
        level = "" if rec["level"] is None else f"{rec['level']:.17g}"
        lines.append(f"{p:.17g},{level},{rec['iterations']},{rec['status']}")
        print(f"p={p:.6g} level={rec['level']} status={rec['status']}")
    atomic_write_text(out / "p_sweep.csv", "\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {"field": cmd_field, "diagnose": cmd_diagnose, "solve": cmd_solve, "scan": cmd_scan}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        settings = resolve_settings(args)
        if args.command != "field" and args.command != "diagnose":
            params_from(settings)  # validate before any computation
        return COMMANDS[args.command](args, settings)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
