"""Command-line front end.

Exit codes
----------
0  success
2  invalid symbol, configuration or arguments
3  numerical failure (bracketing, phase unwrapping, ...); a diagnostic JSON
   document is written to stdout
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .eigensolve import full_spectrum, invert_entry_11, local_spectrum, solve_k
from .errors import NumericalFailure
from .fraclap import bump, constants, discrete_fraclap_apply, fraclap_pv_oracle, match_modes
from .phase import rho_N, rho_limit
from .predictor import levinson, verify_spectral_match
from .symbols import (
    FourierSymbol,
    SimpleLoopSymbol,
    SingularSymbol,
    preset,
    symbol_from_json,
)
from .toeplitz import build, dense_eigh, inverse_entry_dense, matvec

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
COMMANDS = ("spectrum", "phase", "predictor", "fraclap", "fraclap-apply", "invert", "bench")


class InvalidInput(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    symbol: str | None = None
    N: int = 64
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "json"
    seed: int = 0
    options: dict = field(default_factory=dict)

    def validate(self):
        if self.command not in COMMANDS:
            raise InvalidInput(f"unknown command {self.command!r}")
        if not isinstance(self.N, int) or self.N < 2:
            raise InvalidInput("N must be an integer >= 2")
        for k, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or not v > 0:
                raise InvalidInput(f"tolerance {k!r} must be positive")
        if self.format not in ("json", "csv"):
            raise InvalidInput("format must be json or csv")
        return self

    @classmethod
    def from_dict(cls, doc):
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        if "command" not in doc:
            raise InvalidInput("config needs a command")
        return cls(**doc).validate()


def version_string():
    try:
        h = subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).parent,
                           capture_output=True, text=True, timeout=5).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        h = ""
    return f"{__version__}+{h or 'unknown'}"


def load_symbol(spec, J=None):
    if spec is None:
        raise InvalidInput("a symbol is required (--preset or --symbol)")
    try:
        p = Path(spec)
        if p.suffix == ".json" or p.exists():
            return symbol_from_json(p.read_text(), J=J)
        return preset(spec, J=J)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as e:
        raise InvalidInput(f"invalid symbol {spec!r}: {e}") from e


def as_loop(sym, require_monotone=True):
    """Return (loop view, symbol used for dense matrices)."""
    if isinstance(sym, SimpleLoopSymbol):
        loop = sym
    elif isinstance(sym, SingularSymbol):
        loop = sym.as_loop()
    elif isinstance(sym, FourierSymbol):
        loop = SimpleLoopSymbol.from_fourier(sym)
    else:
        raise InvalidInput("unsupported symbol type")
    if require_monotone and not loop.is_increasing_on(0.0, math.pi):
        raise InvalidInput("symbol is not a simple loop (not increasing on [0, pi])")
    return loop, sym


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _csv_text(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(r[c])) if isinstance(r[c], (float, np.floating)) else r[c] for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns (report dict, csv rows, csv columns)

def cmd_spectrum(cfg: RunConfig):
    sym = load_symbol(cfg.symbol, J=cfg.options.get("J"))
    local = cfg.options.get("local")
    loop, dense_sym = as_loop(sym, require_monotone=local is None)
    dense_check = bool(cfg.options.get("dense_check"))
    tol = cfg.tolerances.get("dense", 1e-8 if local is None else 1e-5)
    if local is not None:
        t1, t2 = map(float, local)
        rep = local_spectrum(loop, cfg.N, t1, t2, dense_check=dense_check, dense_symbol=dense_sym, tol=tol)
        inv = {"residuals": all(r.residual <= cfg.tolerances.get("residual", 1e-12) for r in rep.records),
               "no_missing": not rep.missing}
        if rep.bijection is not None:
            inv["bijection"] = rep.bijection["ok"]
    else:
        rep = full_spectrum(loop, cfg.N, dense_check=dense_check)
        inv = rep.check_invariants(loop)
        if dense_check:
            inv["dense_match"] = rep.dense_max_dev <= tol
    if cfg.options.get("dump_matrix"):
        build(dense_sym, cfg.N).save_csv(cfg.options["dump_matrix"])
    out = rep.as_dict()
    out["invariants"] = inv
    rows = []
    for r in rep.records:
        rows.append({"k": r.k, "lambda": r.lam, "gamma": r.gamma, "residual": r.residual})
    return out, rows, ["k", "lambda", "gamma", "residual"], rep.timing


def cmd_phase(cfg: RunConfig):
    sym = load_symbol(cfg.symbol, J=cfg.options.get("J"))
    loop, _ = as_loop(sym)
    n = int(cfg.options.get("grid", 512))
    lam = np.linspace(0.0, 2.0, n + 2)[1:-1]
    samples = rho_N(loop, cfg.N, lam)
    rows = []
    for s in samples:
        rows.append({"lambda_prime": s.lambda_prime, "theta0": s.theta0, "rho_N": s.rho_N,
                     "rho_limit": rho_limit(loop, s.lambda_prime, tol=1.0)})
    inv = {"branch": all(s.check_invariants()["branch"] for s in samples),
           "tau_unit": all(s.check_invariants()["tau_unit"] for s in samples)}
    out = {"N": cfg.N, "samples": rows, "max_abs_rho_N": max(abs(r["rho_N"]) for r in rows), "invariants": inv}
    return out, rows, ["lambda_prime", "theta0", "rho_N", "rho_limit"], {}


def cmd_predictor(cfg: RunConfig):
    sym = load_symbol(cfg.symbol, J=cfg.options.get("J"))
    src = sym.base if isinstance(sym, SimpleLoopSymbol) else sym.coeffs if isinstance(sym, SingularSymbol) else sym
    M = int(cfg.options.get("M", cfg.N))
    autocov = np.zeros(M + 1)
    m = min(M, src.J)
    autocov[: m + 1] = src.coeffs[: m + 1]
    K = levinson(autocov)
    rep = verify_spectral_match(K, autocov)
    zf = K.zero_free_report()
    out = {"M": M, "coeffs": K.coeffs, "prediction_error": K.prediction_error,
           "spectral_match_dev": rep["max_dev"],
           "invariants": {"spectral_match": rep["max_dev"] <= cfg.tolerances.get("match", 1e-8),
                          "zero_free": zf["zero_free"], "beta0_positive": bool(K.coeffs[0] > 0)}}
    rows = [{"k": k, "beta": b} for k, b in enumerate(K.coeffs)]
    return out, rows, ["k", "beta"], {}


def cmd_fraclap(cfg: RunConfig):
    alpha = float(cfg.options.get("alpha", 0.75))
    cname = cfg.options.get("c", "one")
    kmin, kmax = int(cfg.options.get("kmin", 8)), int(cfg.options.get("kmax", 16))
    try:
        sym = preset(f"halpha:{alpha}:{cname}", J=max(cfg.N, 1024))
        consts = constants(alpha)
    except ValueError as e:
        raise InvalidInput(str(e)) from e
    modes = match_modes(alpha, sym.c, cfg.N, range(kmin, kmax + 1), consts=consts,
                        dense=dense_eigh(build(sym, cfg.N)))
    rows = [m.as_row() for m in modes]
    thr = cfg.tolerances.get("overlap", 0.95)
    out = {"alpha": alpha, "N": cfg.N, "c": cname, "constants": consts.as_dict(),
           "modes": [dict(r, flags=list(m.flags)) for r, m in zip(rows, modes)],
           "invariants": {"overlap": all(m.overlap >= thr for m in modes),
                          "within_bound": all(m.eig_gap <= m.bound for m in modes),
                          "no_collision": not any("collision" in m.flags for m in modes)}}
    return out, rows, ["k", "mu_k", "approx", "bound", "matched_lambda", "gap", "overlap"], {}


def cmd_fraclap_apply(cfg: RunConfig):
    alpha = float(cfg.options.get("alpha", 0.75))
    cname = cfg.options.get("c", "one")
    try:
        sym = preset(f"halpha:{alpha}:{cname}", J=cfg.N)
    except ValueError as e:
        raise InvalidInput(str(e)) from e
    c0 = float(sym.c(0.0))
    x, y = discrete_fraclap_apply(alpha, sym.c, cfg.N, bump, sym=sym)
    rows = []
    for xi, yi in zip(x, y):
        o = c0 * fraclap_pv_oracle(alpha, bump, float(xi), support=(0.2, 0.8))[0]
        rows.append({"x": xi, "discrete": yi, "oracle": o, "abs_err": abs(yi - o)})
    out = {"alpha": alpha, "N": cfg.N, "sup_err": max(r["abs_err"] for r in rows), "points": rows,
           "invariants": {}}
    return out, rows, ["x", "discrete", "oracle", "abs_err"], {}


def cmd_invert(cfg: RunConfig):
    sym = load_symbol(cfg.symbol, J=cfg.options.get("J"))
    loop, dense_sym = as_loop(sym)
    lp = float(cfg.options.get("lambda_prime", 0.5))
    try:
        res = invert_entry_11(loop, cfg.N, lp)
    except ValueError as e:
        raise NumericalFailure(str(e), {"lambda_prime": lp, "N": cfg.N}) from e
    dense = inverse_entry_dense(build(dense_sym, cfg.N), 0, 0, shift=res["lambda"])
    rel = abs(res["value"] - dense) / abs(dense)
    out = {"N": cfg.N, "lambda_prime": lp, "lambda": res["lambda"], "formula": res["value"], "dense": dense,
           "rel_dev": rel, "pole_distance": res["pole_distance"],
           "invariants": {"match": rel <= cfg.tolerances.get("rel", 1e-8)}}
    return out, [out], ["lambda_prime", "lambda", "formula", "dense", "rel_dev"], {}


def _median_time(fn, repeats):
    ts = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return float(np.median(ts))


def cmd_bench(cfg: RunConfig):
    sym = load_symbol(cfg.symbol, J=cfg.options.get("J"))
    loop, dense_sym = as_loop(sym)
    N = cfg.N
    reps = max(5, int(cfg.options.get("repeats", 5)))
    rng = np.random.default_rng(cfg.seed)
    T = build(dense_sym, N)
    x = rng.standard_normal(T.size)
    t_naive = _median_time(lambda: matvec(T, x, "naive"), reps)
    t_fft = _median_time(lambda: matvec(T, x, "fft"), reps)
    t_dense = _median_time(lambda: dense_eigh(T), max(1, reps if N <= 1024 else 1))
    ks = np.unique(np.linspace(1, N + 1, 5).astype(int))
    t_root = _median_time(lambda: [solve_k(loop, N, int(k)) for k in ks], reps) / ks.size
    rows = [
        {"item": "char_eq_per_eigenvalue", "seconds": t_root},
        {"item": "char_eq_full_estimate", "seconds": t_root * (N + 1)},
        {"item": "dense_eigh_total", "seconds": t_dense},
        {"item": "matvec_naive", "seconds": t_naive},
        {"item": "matvec_fft", "seconds": t_fft},
    ]
    # all numbers here are wall-clock, so they belong in the timing block
    return {"N": N, "repeats": reps, "invariants": {}}, rows, ["item", "seconds"], {"table": rows}


HANDLERS = {
    "spectrum": cmd_spectrum,
    "phase": cmd_phase,
    "predictor": cmd_predictor,
    "fraclap": cmd_fraclap,
    "fraclap-apply": cmd_fraclap_apply,
    "invert": cmd_invert,
    "bench": cmd_bench,
}


def run(cfg: RunConfig, timing=False, csv_path=None, json_path=None, stdout=None):
    """Execute one configured command; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        cfg.validate()
        t0 = time.perf_counter()
        report, rows, cols, tinfo = HANDLERS[cfg.command](cfg)
    except InvalidInput as e:
        print(json.dumps({"error": "invalid_input", "message": str(e)}), file=stdout)
        return EXIT_INVALID
    except NumericalFailure as e:
        doc = {"error": "numerical_failure", "message": str(e), "diagnostics": _jsonable(e.diagnostics)}
        print(json.dumps(doc), file=stdout)
        return EXIT_NUMERICAL
    report = {"tool": "toeplitz-spectra", "version": __version__, "config": asdict(cfg), **report}
    if timing or cfg.command == "bench":
        report["timing"] = dict(tinfo, wall=time.perf_counter() - t0)
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    csv_text = _csv_text(rows, cols)
    json_path = json_path or (cfg.output if cfg.format == "json" else None)
    csv_path = csv_path or (cfg.output if cfg.format == "csv" else None)
    if json_path:
        Path(json_path).write_text(text + "\n")
    if csv_path:
        Path(csv_path).write_text(csv_text)
    if not json_path and not csv_path:
        print(csv_text if cfg.format == "csv" else text, file=stdout, end="" if cfg.format == "csv" else "\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="toeplitz-spectra", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {version_string()}")
    sub = p.add_subparsers(dest="command")

    def common(sp, symbol=True):
        if symbol:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--preset", help="tridiag | loop1 | ar1 | const | halpha:a[:one|cos03]")
            g.add_argument("--symbol", help="symbol JSON file")
            sp.add_argument("--J", type=int, help="truncation order for series symbols")
        sp.add_argument("--N", type=int)
        sp.add_argument("--json", dest="json_out", help="write the JSON report here")
        sp.add_argument("--csv", dest="csv_out", help="write the CSV table here")
        sp.add_argument("--format", choices=["json", "csv"], help="stdout format")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--config", help="RunConfig JSON; command-line flags override it")
        sp.add_argument("--timing", action="store_true", help="add wall-clock timings to the report")
        sp.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")

    sp = sub.add_parser("spectrum", help="eigenvalues from the characteristic equation")
    common(sp)
    sp.add_argument("--dense-check", action="store_true")
    sp.add_argument("--local", nargs=2, type=float, metavar=("THETA1", "THETA2"))
    sp.add_argument("--dump-matrix")

    sp = sub.add_parser("phase", help="rho_N and its limit along a lambda' sweep")
    common(sp)
    sp.add_argument("--grid", type=int)

    sp = sub.add_parser("predictor", help="predictor polynomial and spectral match")
    common(sp)
    sp.add_argument("--M", type=int)

    for name in ("fraclap", "fraclap-apply"):
        sp = sub.add_parser(name, help="fractional-Laplacian modes" if name == "fraclap" else
                            "discrete operator vs principal-value oracle")
        common(sp, symbol=False)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--c", help="regular factor preset: one | cos03")
        if name == "fraclap":
            sp.add_argument("--kmin", type=int)
            sp.add_argument("--kmax", type=int)
            sp.add_argument("--modes", help="CSV output for the mode table")
        else:
            sp.add_argument("--bump", action="store_true", help="use the standard bump (default)")

    sp = sub.add_parser("invert", help="closed-form (1,1) entry of (T_N(f) - lambda)^-1")
    common(sp)
    sp.add_argument("--lambda-prime", type=float)

    sp = sub.add_parser("bench", help="timing table (report only)")
    common(sp)
    sp.add_argument("--repeats", type=int)
    return p


_OPTION_KEYS = ("J", "dense_check", "local", "dump_matrix", "grid", "M", "alpha", "c", "kmin", "kmax",
                "lambda_prime", "repeats")


def config_from_args(args) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise InvalidInput(f"cannot read config: {e}") from e
        if not isinstance(base, dict):
            raise InvalidInput("config must be a JSON object")
    cfg = RunConfig.from_dict({"command": args.command, **base}) if base else RunConfig(command=args.command)
    if cfg.command != args.command:
        raise InvalidInput("config command differs from the command line")
    sym = getattr(args, "preset", None) or getattr(args, "symbol", None)
    if sym:
        cfg.symbol = sym
    if args.N is not None:
        cfg.N = args.N
    if args.seed is not None:
        cfg.seed = args.seed
    if args.format:
        cfg.format = args.format
    for item in args.tol:
        name, _, value = item.partition("=")
        try:
            cfg.tolerances[name] = float(value)
        except ValueError as e:
            raise InvalidInput(f"bad tolerance {item!r}") from e
    for key in _OPTION_KEYS:
        v = getattr(args, key, None)
        if v not in (None, False):
            cfg.options[key] = list(v) if isinstance(v, (list, tuple)) else v
    return cfg.validate()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_INVALID
    try:
        cfg = config_from_args(args)
    except InvalidInput as e:
        print(json.dumps({"error": "invalid_input", "message": str(e)}))
        return EXIT_INVALID
    csv_out = args.csv_out or getattr(args, "modes", None)
    return run(cfg, timing=args.timing, csv_path=csv_out, json_path=args.json_out)


if __name__ == "__main__":
    sys.exit(main())
