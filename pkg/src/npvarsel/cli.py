"""
Command-line harness.

Exit status: 0 on success, 1 on a runtime or numerical failure, 2 on a
usage or input-parsing error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .fourier_select import select, tuning
from .lattice_count import count_exact, radius_sq_from_gamma
from .params import MODEL_PARAM_KEYS, ModelParams
from .synth import ExperimentConfig, SparseAdditiveFunction, TrialError, mc_error
from .theta_saddle import SaddlePointError, figure_curves, phi, regime_constants, solve_saddle

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad arguments or malformed input files (exit status 2)."""


def fmt_float(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


@dataclass
class RunManifest:
    subcommand: str
    params: Dict
    seed: Optional[int]
    version: str
    duration_s: float
    checksum: str


# ---------------------------------------------------------------- file helpers


def read_keyvalue(path: str, allowed: Sequence[str]) -> Dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment."""
    out: Dict[str, str] = {}
    try:
        fh = sys.stdin if path == "-" else open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in allowed:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r} in line {raw.rstrip()!r}")
            if key in out:
                raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
            out[key] = value
    return out


def _num(raw: Dict[str, str], key: str, kind=float):
    try:
        v = kind(float(raw[key])) if kind is int else kind(raw[key])
    except ValueError as exc:
        raise UsageError(f"invalid value for {key}: {raw[key]!r}") from exc
    if kind is int and float(raw[key]) != v:
        raise UsageError(f"{key} must be an integer, got {raw[key]!r}")
    return v


def _bool(raw: Dict[str, str], key: str, default: bool = False) -> bool:
    if key not in raw:
        return default
    v = raw[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"invalid boolean for {key}: {raw[key]!r}")


def params_from_raw(raw: Dict[str, str], required=MODEL_PARAM_KEYS) -> ModelParams:
    missing = [k for k in required if k not in raw]
    if missing:
        raise UsageError(f"missing keys: {', '.join(missing)}")
    kwargs = {}
    for key in MODEL_PARAM_KEYS:
        if key in raw:
            kwargs[key] = _num(raw, key, int if key == "d_star" else float)
    try:
        return ModelParams(**kwargs)
    except ValueError as exc:
        raise UsageError(f"invalid parameters: {exc}") from exc


def write_atomic(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_with_manifest(path: str, text: str, subcommand: str, params: Dict,
                        seed: Optional[int], started: float) -> RunManifest:
    checksum = hashlib.sha256(text.encode("utf-8")).hexdigest()
    manifest = RunManifest(subcommand, params, seed, __version__,
                           round(time.perf_counter() - started, 6), checksum)
    write_atomic(path, text)
    if path != "-":
        write_atomic(path + ".manifest.json", json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return manifest


def csv_text(header: Sequence[str], rows: List[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def read_data_csv(path: str):
    """Read a ``x1,...,xd,y`` CSV into (X, Y)."""
    try:
        fh = sys.stdin if path == "-" else open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise UsageError(f"{path}: empty data file")
        header = [h.strip() for h in header]
        d = len(header) - 1
        expected = [f"x{i}" for i in range(1, d + 1)] + ["y"]
        if d < 1 or header != expected:
            raise UsageError(f"{path}:1: header must be x1,...,xd,y, got {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != d + 1:
                raise UsageError(f"{path}:{lineno}: expected {d + 1} columns, found {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
            if any(not (0.0 <= v <= 1.0) for v in vals[:-1]):
                raise UsageError(f"{path}:{lineno}: design value outside [0, 1]")
            if not all(math.isfinite(v) for v in vals):
                raise UsageError(f"{path}:{lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise UsageError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=np.float64)
    return arr[:, :d], arr[:, d]


# ---------------------------------------------------------------- subcommands


def cmd_count(args) -> int:
    if (args.gamma is None) == (args.radius_sq is None):
        raise UsageError("give exactly one of --gamma or --radius-sq")
    if args.dstar < 1:
        raise UsageError("--dstar must be positive")
    if args.radius_sq is not None:
        if args.radius_sq < 0:
            raise UsageError("--radius-sq must be nonnegative")
        r = args.radius_sq
    else:
        if args.gamma < 0:
            raise UsageError("--gamma must be nonnegative")
        r = radius_sq_from_gamma(args.gamma, args.dstar)
    c = count_exact(args.dstar, r)
    if args.format == "json":
        out = json.dumps({
            "d_star": args.dstar, "radius_sq": r,
            "N1": c.n1, "N2": c.n2, "N": c.n_diff,
            "logN1": c.log_n1, "logN2": c.log_n2,
            "logN": None if c.n_diff == 0 else c.log_n_diff,
        }) + "\n"
    elif args.format == "csv":
        out = csv_text(
            ["d_star", "radius_sq", "N1", "N2", "N", "logN1", "logN2", "logN"],
            [[args.dstar, r, c.n1, c.n2, c.n_diff,
              fmt_float(c.log_n1), fmt_float(c.log_n2), fmt_float(c.log_n_diff)]],
        )
    else:
        out = (
            f"N1={c.n1} N2={c.n2} N={c.n_diff}\n"
            f"logN1={fmt_float(c.log_n1)} logN2={fmt_float(c.log_n2)} logN={fmt_float(c.log_n_diff)}\n"
        )
    sys.stdout.write(out)
    return EXIT_OK


def cmd_saddle(args) -> int:
    if not args.gamma > 0:
        raise UsageError("--gamma must be positive")
    sp = solve_saddle(args.gamma, tol=args.tol)
    residual = abs(phi(sp.y_gamma) - sp.gamma)
    fields = {
        "gamma": sp.gamma, "y_gamma": sp.y_gamma, "z_gamma": sp.z_gamma,
        "l_value": sp.l_val, "l_second": sp.l_pp, "h_value": sp.h_val, "residual": residual,
    }
    if args.format == "json":
        sys.stdout.write(json.dumps(fields) + "\n")
    elif args.format == "csv":
        sys.stdout.write(csv_text(list(fields), [[fmt_float(v) for v in fields.values()]]))
    else:
        sys.stdout.write(" ".join(f"{k}={fmt_float(v)}" for k, v in fields.items()) + "\n")
    return EXIT_OK


def cmd_curve(args) -> int:
    started = time.perf_counter()
    if not (0 < args.gamma_min < args.gamma_max) or args.steps < 2:
        raise UsageError("need 0 < --gamma-min < --gamma-max and --steps >= 2")
    if args.spacing == "log":
        grid = np.geomspace(args.gamma_min, args.gamma_max, args.steps)
    else:
        grid = np.linspace(args.gamma_min, args.gamma_max, args.steps)
    rows = figure_curves(grid)
    text = csv_text(["gamma", "z_gamma", "l_value"], [[fmt_float(v) for v in r] for r in rows])
    params = {"gamma_min": args.gamma_min, "gamma_max": args.gamma_max,
              "steps": args.steps, "spacing": args.spacing}
    write_with_manifest(args.out, text, "curve", params, None, started)
    return EXIT_OK


def cmd_regime(args) -> int:
    raw = read_keyvalue(args.params, MODEL_PARAM_KEYS + ("n", "alpha"))
    if args.n is not None:
        raw["n"] = str(args.n)
    missing = [k for k in MODEL_PARAM_KEYS + ("n",) if k not in raw]
    if missing:
        raise UsageError(f"missing keys: {', '.join(missing)}")
    params = params_from_raw(raw)
    n = _num(raw, "n", int)
    alpha = _num(raw, "alpha") if "alpha" in raw else 0.2
    if n < 1 or not 0 < alpha < 1:
        raise UsageError("need n >= 1 and 0 < alpha < 1")
    report = regime_constants(params, n, alpha)
    payload = {"params": params.to_dict(), **report.to_dict()}
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_select(args) -> int:
    X, Y = read_data_csv(args.data)
    raw = read_keyvalue(args.params, MODEL_PARAM_KEYS + ("n", "alpha"))
    params = params_from_raw(raw)
    if params.d != X.shape[1]:
        raise UsageError(f"params d={params.d} but data has {X.shape[1]} covariates")
    tune = tuning(params, X.shape[0], scale=args.lambda_scale)
    if args.lam is not None:
        if not args.lam > 0:
            raise UsageError("--lambda must be positive")
        tune = type(tune)(tune.m, args.lam, tune.radius_sq)
    res = select(X, Y, None, params, tune, cap_at_d_star=args.cap)
    witnesses = [
        {"support": list(r.k.support), "values": list(r.k.values), "trig": r.trig, "coefficient": r.value}
        for r in res.records
    ]
    if args.format == "json":
        sys.stdout.write(json.dumps({
            "selected": res.selected_sorted, "lambda": tune.lam, "m": tune.m,
            "levels_visited": res.levels_visited, "stopped_early": res.stopped_early,
            "records": witnesses,
        }, indent=2) + "\n")
    else:
        lines = [
            "selected=" + ",".join(str(j) for j in res.selected_sorted),
            f"lambda={fmt_float(tune.lam)} m={fmt_float(tune.m)}",
            f"levels_visited={res.levels_visited} stopped_early={str(res.stopped_early).lower()}",
        ]
        for w in witnesses:
            k = " ".join(f"{s}:{v}" for s, v in zip(w["support"], w["values"]))
            lines.append(f"witness k=[{k}] {w['trig']} {fmt_float(w['coefficient'])}")
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


SIM_KEYS = MODEL_PARAM_KEYS + (
    "n", "trials", "seed", "amplitudes", "random_pattern", "cap_at_d_star",
    "lambda_scale", "lambda",
)


def _parse_amplitudes(text: str) -> Dict[int, float]:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" not in part:
            raise UsageError(f"amplitude entries must be 'j:a', got {part!r}")
        j, a = part.split(":", 1)
        try:
            out[int(j)] = float(a)
        except ValueError as exc:
            raise UsageError(f"invalid amplitude entry {part!r}") from exc
    if not out:
        raise UsageError("amplitudes is empty")
    return out


def simulation_plan(raw: Dict[str, str], seed_override: Optional[int] = None):
    """Resolve a simulate config into ``(grid, params, spec, options)``."""
    for key in ("d", "d_star", "n", "trials"):
        if key not in raw:
            raise UsageError(f"missing key: {key}")
    if ("amplitudes" in raw) == _bool(raw, "random_pattern"):
        raise UsageError("give exactly one of 'amplitudes' or 'random_pattern = true'")
    try:
        grid = [int(float(v)) for v in raw["n"].split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"invalid n grid: {raw['n']!r}") from exc
    if not grid or any(v < 1 for v in grid):
        raise UsageError("n grid must contain positive integers")
    d = _num(raw, "d", int)
    d_star = _num(raw, "d_star", int)
    kappa = _num(raw, "kappa") if "kappa" in raw else 1.0
    L = _num(raw, "L") if "L" in raw else 1.0
    if "amplitudes" in raw:
        try:
            spec = SparseAdditiveFunction(d, _parse_amplitudes(raw["amplitudes"]))
        except ValueError as exc:
            raise UsageError(f"invalid amplitudes: {exc}") from exc
        l2, linf = spec.l2, spec.linf
    else:
        def spec(rng, d=d, d_star=d_star, kappa=kappa, L=L):
            return SparseAdditiveFunction.random(d, d_star, rng, kappa=kappa, L=L)
        l2 = math.sqrt(d_star * L)
        linf = math.sqrt(2.0) * d_star * math.sqrt(L)
    resolved = dict(raw)
    resolved.setdefault("L2", repr(l2))
    resolved.setdefault("L_inf", repr(linf))
    resolved.setdefault("sigma", "0.0")
    params = params_from_raw(resolved, required=("d", "d_star"))
    seed = seed_override if seed_override is not None else (_num(raw, "seed", int) if "seed" in raw else 0)
    options = {
        "trials": _num(raw, "trials", int),
        "base_seed": seed,
        "cap_at_d_star": _bool(raw, "cap_at_d_star"),
        "lambda_scale": _num(raw, "lambda_scale") if "lambda_scale" in raw else 4.0,
        "lambda_override": _num(raw, "lambda") if "lambda" in raw else None,
    }
    if options["trials"] < 1:
        raise UsageError("trials must be positive")
    return grid, params, spec, options


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    raw = read_keyvalue(args.config, SIM_KEYS)
    grid, params, spec, options = simulation_plan(raw, args.seed)
    rows = []
    for n in grid:
        try:
            cfg = ExperimentConfig(params=params, n=n, function_spec=spec, **options)
        except ValueError as exc:
            raise UsageError(f"invalid experiment: {exc}") from exc
        rate, _ = mc_error(cfg, threads=args.threads)
        rows.append([n, params.d, params.d_star, fmt_float(rate), options["trials"], options["base_seed"]])
    text = csv_text(["n", "d", "dstar", "error_rate", "trials", "seed"], rows)
    resolved = {**params.to_dict(), **options, "n_grid": grid}
    resolved.pop("base_seed")
    if "amplitudes" in raw:
        resolved["amplitudes"] = raw["amplitudes"]
    else:
        resolved["random_pattern"] = True
    write_with_manifest(args.out, text, "simulate", resolved, options["base_seed"], started)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base random seed (simulate)")
    common.add_argument("--threads", type=int, default=1, help="worker threads (simulate)")
    common.add_argument("--format", choices=("plain", "json", "csv"), default="plain",
                        help="output format for printed results")

    parser = argparse.ArgumentParser(
        prog="npvarsel",
        description="Sparsity pattern recovery by Fourier thresholding and lattice-point counting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("count", parents=[common], help="exact lattice counts N1, N2, N")
    p.add_argument("--dstar", type=int, required=True, help="ball dimension d*")
    p.add_argument("--gamma", type=float, help="squared radius is floor(gamma * d*)")
    p.add_argument("--radius-sq", type=int, dest="radius_sq", help="integer squared radius")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("saddle", parents=[common], help="saddle point z_gamma and l values")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12, help="residual tolerance |phi(y) - gamma|")
    p.set_defaults(func=cmd_saddle)

    p = sub.add_parser("curve", parents=[common], help="CSV of gamma, z_gamma, l_gamma(z_gamma)")
    p.add_argument("--gamma-min", type=float, dest="gamma_min", required=True)
    p.add_argument("--gamma-max", type=float, dest="gamma_max", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--spacing", choices=("linear", "log"), default="linear")
    p.add_argument("--out", required=True, help="output CSV path, '-' for stdout")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("regime", parents=[common], help="regime constants and condition flags as JSON")
    p.add_argument("--params", required=True, help="key = value file with model constants, n, alpha")
    p.add_argument("--n", type=int, default=None, help="sample size (overrides the file)")
    p.set_defaults(func=cmd_regime)

    p = sub.add_parser("select", parents=[common], help="estimate the sparsity pattern of a data set")
    p.add_argument("--data", required=True, help="CSV with header x1,...,xd,y ('-' for stdin)")
    p.add_argument("--params", required=True, help="key = value file with model constants")
    p.add_argument("--cap", action="store_true", help="stop once d* coordinates are selected")
    p.add_argument("--lambda-scale", type=float, dest="lambda_scale", default=4.0,
                   help="constant in front of the threshold formula")
    p.add_argument("--lambda", type=float, dest="lam", default=None, help="fixed threshold")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo recovery error over an n grid")
    p.add_argument("--config", required=True, help="key = value experiment file")
    p.add_argument("--out", required=True, help="output CSV path, '-' for stdout")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"npvarsel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SaddlePointError, TrialError, ArithmeticError, ValueError) as exc:
        print(f"npvarsel {args.command}: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
