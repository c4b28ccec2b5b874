"""Command-line interface.

Subcommands: ``steady``, ``evolve``, ``currents``, ``fluct``, ``sweep``,
``critical``. Parameters come from flags or from an INI file (``--config``)
with a ``[params]`` section plus one section per subcommand; flags win.

Exit codes: 0 success, 1 usage or parameter error, 2 numerical failure. On
failure a JSON error object is written to stderr.
"""

from __future__ import annotations

import argparse
import configparser
import io
import json
import logging
import math
import sys
from typing import Optional

import numpy as np

from . import __version__
from .analytic import critical_delta, g_c, steady_state
from .currents import kirchhoff_audit
from .errors import Diverged, NoRoot, NoTransition, NumericalError, ParameterError, SRCurrentError
from .fluctuations import hp_coefficients, integrate_correlators, photon_number_fluctuations
from .meanfield import MeanFieldState, integrate
from .model import DetuningLadder, SystemParams, expand_ladder, validate
from .stability import classify
from .sweep import AxisSpec, csv_text, export, run_sweep, to_json_dict

log = logging.getLogger("srcurrent")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

# (flag dest, config key, type)
PARAM_KEYS = [
    ("omega_c", "omega_c", float),
    ("delta", "delta", float),
    ("freqs", "freqs", str),
    ("j", "j", float),
    ("kappa", "kappa", float),
    ("g", "g", float),
    ("n_cavities", "n_cavities", int),
    ("omega", "omega", float),
    ("n_emitters", "n_emitters", int),
]

COMMAND_KEYS = {
    "steady": [("branch", str), ("tol_stability", float)],
    "currents": [("branch", str), ("format", str)],
    "evolve": [("t_end", float), ("tol", float), ("atol", float), ("z0", float),
               ("x_sign", str), ("dt", float)],
    "fluct": [("g_range", str), ("solver", str), ("branch", str)],
    "sweep": [("axis", str), ("observable", str), ("workers", int), ("format", str),
              ("path", str)],
    "critical": [],
}

DEFAULTS = {
    "delta": 0.0, "j": 0.0, "kappa": 0.0, "g": None, "n_cavities": 3, "omega": 1.0,
    "branch": "+", "tol_stability": 1e-8, "format": "json",
    "t_end": 500.0, "tol": 1e-9, "atol": 1e-12, "z0": -0.499, "x_sign": "+", "dt": None,
    "solver": "lyapunov", "observable": "total_current", "workers": 1, "path": "auto",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_param_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("system parameters (units of Omega)")
    g.add_argument("--config", help="INI file with [params] and per-command sections")
    g.add_argument("--omega-c", dest="omega_c", type=float, help="base cavity frequency")
    g.add_argument("--delta", type=float, help="ladder step between neighbouring cavities")
    g.add_argument("--freqs", help="explicit comma-separated cavity frequencies")
    g.add_argument("--j", type=float, help="hopping J")
    g.add_argument("--kappa", type=float, help="cavity loss rate")
    g.add_argument("--g", type=float, help="spin-cavity coupling")
    g.add_argument("--n-cavities", dest="n_cavities", type=int)
    g.add_argument("--omega", type=float, help="absolute value of Omega, for reporting only")
    g.add_argument("--n-emitters", dest="n_emitters", type=int)
    p.add_argument("-o", "--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srcurrent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("steady", help="analytic steady state, stability and currents (JSON)")
    _add_param_flags(p)
    p.add_argument("--branch", choices=["+", "-"])
    p.add_argument("--tol-stability", dest="tol_stability", type=float)

    p = sub.add_parser("currents", help="current report (JSON or CSV)")
    _add_param_flags(p)
    p.add_argument("--branch", choices=["+", "-"])
    p.add_argument("--format", choices=["json", "csv"])

    p = sub.add_parser("evolve", help="mean-field trajectory (CSV)")
    _add_param_flags(p)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--tol", type=float, help="relative tolerance")
    p.add_argument("--atol", type=float)
    p.add_argument("--z0", type=float, help="initial Z (alpha = 0, Y = 0)")
    p.add_argument("--x-sign", dest="x_sign", choices=["+", "-"])
    p.add_argument("--dt", type=float, help="sampling interval (default: every step)")

    p = sub.add_parser("fluct", help="photon-number fluctuations versus g (CSV)")
    _add_param_flags(p)
    p.add_argument("--g-range", dest="g_range", help="min:max:count")
    p.add_argument("--solver", choices=["lyapunov", "integrate"])
    p.add_argument("--branch", choices=["+", "-"])

    p = sub.add_parser("sweep", help="phase diagram over one or two axes")
    _add_param_flags(p)
    p.add_argument("--axis", action="append", help="name:min:max:count (repeat for 2-D)")
    p.add_argument("--observable")
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--path", choices=["auto", "analytic", "evolve"])

    p = sub.add_parser("critical", help="critical coupling and critical detuning (JSON)")
    _add_param_flags(p)
    return parser


def _read_config(path: Optional[str], command: str) -> dict:
    if not path:
        return {}
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out = {}
    sections = {"params": PARAM_KEYS, command: [(k, k, t) for k, t in COMMAND_KEYS[command]]}
    for section, keys in sections.items():
        if not cp.has_section(section):
            continue
        known = {k for _, k, _ in keys}
        extra = set(cp[section]) - known
        if extra:
            raise UsageError(f"unknown keys in [{section}]: {sorted(extra)}")
        for dest, key, typ in keys:
            if key in cp[section]:
                raw = cp[section][key]
                try:
                    out[dest] = raw if typ is str else typ(raw)
                except ValueError as exc:
                    raise UsageError(f"bad value for {key} in [{section}]: {raw!r}") from exc
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicitly given flags."""
    cfg = dict(DEFAULTS)
    cfg.update(_read_config(args.config, args.command))
    for dest, value in vars(args).items():
        if value is not None and dest not in ("config", "command", "verbose", "output"):
            cfg[dest] = value
    if isinstance(cfg.get("axis"), str):
        cfg["axis"] = [a for a in cfg["axis"].replace(",", " ").split() if a]
    return cfg


def params_from(cfg: dict) -> SystemParams:
    n = int(cfg["n_cavities"])
    if cfg.get("freqs"):
        freqs = [float(w) for w in str(cfg["freqs"]).split(",")]
    elif cfg.get("omega_c") is not None:
        freqs = expand_ladder(DetuningLadder(cfg["omega_c"], cfg["delta"]), n)
    else:
        raise UsageError("cavity frequencies missing: give --omega-c (with --delta) or --freqs")
    g = 0.0 if cfg.get("g") is None else cfg["g"]
    return validate(SystemParams(cavity_freqs=freqs, hopping=cfg["j"], coupling=g,
                                 cavity_loss=cfg["kappa"], n_cavities=len(freqs),
                                 n_emitters=cfg.get("n_emitters"), omega_scale=cfg["omega"]))


def _sign(s: str) -> int:
    return -1 if str(s).strip() in ("-", "-1", "minus") else 1


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def cmd_steady(cfg, params) -> str:
    sol = steady_state(params, _sign(cfg["branch"]))
    verdict = classify(sol, params, cfg["tol_stability"])
    sol = sol.replace(stability="stable" if verdict.stable else "unstable")
    report = kirchhoff_audit(sol, params)
    try:
        gc = g_c(params)
    except NoTransition:
        gc = None
    out = {
        "params": params.to_dict(),
        "g_c": gc,
        "solution": sol.to_dict(),
        "stability": verdict.to_dict(),
        "currents": {k: v for k, v in report.to_dict().items() if k != "params"},
    }
    return _dumps(out)


def cmd_currents(cfg, params) -> str:
    report = kirchhoff_audit(steady_state(params, _sign(cfg["branch"])), params)
    return report.to_csv() if cfg["format"] == "csv" else report.to_json() + "\n"


def cmd_evolve(cfg, params) -> str:
    seed = MeanFieldState.seed(params.n_cavities, cfg["z0"], _sign(cfg["x_sign"]))
    t_eval = None
    if cfg.get("dt"):
        n = int(math.floor(cfg["t_end"] / cfg["dt"] + 1e-9))
        t_eval = [cfg["dt"] * k for k in range(1, n + 1)]
        if not t_eval or t_eval[-1] < cfg["t_end"]:
            t_eval.append(cfg["t_end"])
    traj = integrate(seed, params, cfg["t_end"], tol=cfg["tol"], atol=cfg["atol"], t_eval=t_eval)
    log.info("integration: %s", traj.metadata)
    return traj.to_csv()


def cmd_fluct(cfg, params) -> str:
    if cfg.get("g_range"):
        ax = AxisSpec.parse("g:" + cfg["g_range"])
        gs = ax.values
    elif cfg.get("g") is not None:
        gs = [cfg["g"]]
    else:
        raise UsageError("fluct needs --g or --g-range")
    n = params.n_cavities
    try:
        delta = float(np.diff(params.freqs)[0])
    except IndexError:
        delta = 0.0
    buf = io.StringIO()
    buf.write("# params: " + json.dumps(params.to_dict(), sort_keys=True) + "\n")
    buf.write(",".join(["g", "delta"] + [f"n_{i + 1}" for i in range(n)] + ["status"]) + "\n")
    for g in gs:
        p = params.replace(coupling=float(g))
        try:
            sol = steady_state(p, _sign(cfg["branch"]))
            if cfg["solver"] == "integrate":
                nc = integrate_correlators(hp_coefficients(sol, p), p)
            else:
                nc = photon_number_fluctuations(sol, p)
            vals, status = [repr(float(v)) for v in nc], "ok"
        except Diverged:
            vals, status = [""] * n, "diverged"
        except NumericalError as exc:
            vals, status = [""] * n, type(exc).__name__
        buf.write(",".join([repr(float(g)), repr(delta)] + vals + [status]) + "\n")
    return buf.getvalue()


def cmd_sweep(cfg, params, output: Optional[str]) -> Optional[str]:
    axes_raw = cfg.get("axis") or []
    if not axes_raw:
        raise UsageError("sweep needs at least one --axis")
    try:
        axes = [AxisSpec.parse(a) for a in axes_raw]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        diagram = run_sweep(params, axes, cfg["observable"], workers=cfg["workers"],
                            path=cfg["path"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if output:
        export(diagram, cfg["format"], output)
        return None
    if cfg["format"] == "csv":
        return csv_text(diagram)
    return json.dumps(to_json_dict(diagram), indent=1) + "\n"


def cmd_critical(cfg, params) -> str:
    out = {"params": params.to_dict(), "g_c": None, "delta_c": None}
    try:
        out["g_c"] = g_c(params)
    except NoTransition:
        pass
    if params.n_cavities == 3 and cfg.get("g") is not None:
        try:
            out["delta_c"] = critical_delta(params, cfg["g"])
        except NoRoot as exc:
            log.info("no critical detuning: %s", exc)
    return _dumps(out)


def _emit(text: Optional[str], output: Optional[str]):
    if text is None:
        return
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(exc: Exception, code: int) -> int:
    payload = exc.to_dict() if isinstance(exc, SRCurrentError) else {
        "error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(payload, default=_json_default) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(exc, EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = resolve(args)
        params = params_from(cfg)
        if args.command == "steady":
            text = cmd_steady(cfg, params)
        elif args.command == "currents":
            text = cmd_currents(cfg, params)
        elif args.command == "evolve":
            text = cmd_evolve(cfg, params)
        elif args.command == "fluct":
            text = cmd_fluct(cfg, params)
        elif args.command == "sweep":
            text = cmd_sweep(cfg, params, args.output)
            if text is None:
                return EXIT_OK
        else:
            text = cmd_critical(cfg, params)
        _emit(text, args.output)
    except (UsageError, ParameterError) as exc:
        return _fail(exc, EXIT_USAGE)
    except (NumericalError, ArithmeticError) as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except OSError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
