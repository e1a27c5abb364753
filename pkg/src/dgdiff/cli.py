"""``dgdiff`` command line: ``analyze``, ``scan`` and ``solve``.

A JSON config file is the source of truth; every key also has a flag of the
same name (``--N_e 6``) that overrides it.  Outputs are CSV (or JSON) tables
written atomically into ``out_dir`` next to ``config.json``, the fully
resolved configuration.  Exit codes: 0 success, 2 bad configuration,
3 instability (blow-up, flagged samples or an unstable scan entry).
"""

from __future__ import annotations

import argparse
import ast
import json
import logging
import math
import operator
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import experiments as ex
from .fourier import (
    RKScheme,
    analyze,
    default_eta_grid,
    max_dtau_scan,
    min_eta_scan,
)
from .schemes import Formulation, SchemeConfig
from .solver import BlowUpError, sample_continuous

logger = logging.getLogger("dgdiff")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3

COMMANDS = ("analyze", "scan", "solve")
EXPERIMENTS = ("fourier_mode", "gaussian", "burgers")
FORMATS = ("csv", "json")

FULL_PRECISION = "%.17g"
PAPER_FORMATS = {
    "eta_min": "%.2f",
    "dtau_max": "%.4g",
    "dG": "%.3g",
    "dG_num": "%.3g",
}
PAPER_DEFAULT = "%.4f"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


# ---------------------------------------------------------------------------
# value coercion

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_number(text: str) -> float:
    """Arithmetic on numbers and ``pi`` only, e.g. ``"pi/3"``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise ValueError(text)

    return ev(ast.parse(text.strip(), mode="eval"))


def _float(key, v):
    if isinstance(v, bool):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        out = float(v)
    elif isinstance(v, str):
        try:
            out = _eval_number(v)
        except (ValueError, SyntaxError, ZeroDivisionError):
            raise ConfigError(key, f"expected a number, got {v!r}") from None
    else:
        raise ConfigError(key, f"expected a number, got {v!r}")
    if not math.isfinite(out):
        raise ConfigError(key, f"must be finite, got {v!r}")
    return out


def _int(key, v):
    if isinstance(v, bool):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if isinstance(v, int):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    if isinstance(v, str):
        try:
            return int(v)
        except ValueError:
            pass
    raise ConfigError(key, f"expected an integer, got {v!r}")


def _bool(key, v):
    if isinstance(v, bool):
        return v
    if isinstance(v, str) and v.lower() in ("true", "false", "1", "0", "yes", "no"):
        return v.lower() in ("true", "1", "yes")
    raise ConfigError(key, f"expected true or false, got {v!r}")


def _str(key, v, choices=None):
    if not isinstance(v, str):
        raise ConfigError(key, f"expected a string, got {v!r}")
    if choices is not None and v not in choices:
        raise ConfigError(key, f"must be one of {list(choices)}, got {v!r}")
    return v


def _list(key, v, conv):
    items = v if isinstance(v, (list, tuple)) else [v]
    if not items:
        raise ConfigError(key, "must not be empty")
    return [conv(key, x) for x in items]


def _positive(key, v):
    if not v > 0:
        raise ConfigError(key, f"must be positive, got {v}")
    return v


def _formulation(key, v):
    try:
        return Formulation.parse(_str(key, v)).value
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def _rk(key, v):
    try:
        return RKScheme.parse(v if isinstance(v, (int, str)) else str(v)).name
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from None


def _k_grid(key, v):
    # an integer n means n points on [0, pi] inclusive
    if isinstance(v, (list, tuple)) and len(v) == 1:
        v = v[0]
    if isinstance(v, (list, tuple)):
        grid = [_float(key, x) for x in v]
        if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 0 or grid[-1] > math.pi + 1e-12:
            raise ConfigError(key, "must be strictly increasing within [0, pi]")
        return grid
    n = _int(key, v)
    if n < 2:
        raise ConfigError(key, f"needs at least 2 points, got {n}")
    return n


# key -> coercion; list-capable keys accept scalars too
SCHEMA = {
    "command": lambda k, v: _str(k, v, COMMANDS),
    "formulation": lambda k, v: _list(k, v, _formulation) if isinstance(v, list) else _formulation(k, v),
    "p": lambda k, v: _list(k, v, _int) if isinstance(v, list) else _int(k, v),
    "eta": lambda k, v: _list(k, v, _float) if isinstance(v, list) else _float(k, v),
    "beta_switch": lambda k, v: _str(k, v, ("right", "left")),
    "gamma": lambda k, v: _positive(k, _float(k, v)),
    "rk": lambda k, v: _list(k, v, _rk) if isinstance(v, list) else _rk(k, v),
    "N_e": lambda k, v: _int(k, v),
    "dtau": lambda k, v: _positive(k, _float(k, v)),
    "dt": lambda k, v: _positive(k, _float(k, v)),
    "tau_p": lambda k, v: _list(k, v, _float),
    "K_grid": _k_grid,
    "experiment": lambda k, v: _str(k, v, EXPERIMENTS),
    "b": lambda k, v: _positive(k, _float(k, v)),
    "L": lambda k, v: _positive(k, _float(k, v)),
    "rho": lambda k, v: _positive(k, _float(k, v)),
    "amp": lambda k, v: _positive(k, _float(k, v)),
    "k_max": lambda k, v: _int(k, v),
    "n_samples": lambda k, v: _int(k, v),
    "seed": lambda k, v: _int(k, v),
    "q_samples": lambda k, v: _int(k, v),
    "out_dir": lambda k, v: _str(k, v),
    "format": lambda k, v: _str(k, v, FORMATS),
    "scan": lambda k, v: _str(k, v, ("eta", "dtau")),
    "t_end": lambda k, v: _float(k, v),
    "K_target": lambda k, v: _float(k, v),
    "spectrum": lambda k, v: _str(k, v, ex.SPECTRUM_FORMS),
    "transform": lambda k, v: _str(k, v, ("sampled", "exact")),
    "paper_precision": _bool,
}

LIST_KEYS = {"formulation", "p", "eta", "rk", "tau_p", "K_grid"}

COMMON_DEFAULTS = {
    "formulation": "SIPG_BR2",
    "eta": 1.0,
    "beta_switch": "right",
    "rk": "RK3",
    "out_dir": "dgdiff_out",
    "format": "csv",
    "paper_precision": False,
}

COMMAND_DEFAULTS = {
    "analyze": {"p": 2, "gamma": 1.0, "tau_p": [1.0], "K_grid": 101},
    "scan": {"scan": "eta", "p": [1, 2, 3, 4, 5, 6, 7, 8], "gamma": 1.0},
}

EXPERIMENT_DEFAULTS = {
    "fourier_mode": {"p": 2, "gamma": 1.0, "N_e": 6, "dt": 1e-4, "tau_p": [2.0],
                     "K_target": math.pi / 3, "L": 1.0, "q_samples": 10},
    "gaussian": {"p": 2, "gamma": 0.01, "N_e": 50, "dtau": 0.0025, "tau_p": [0.01, 0.5],
                 "b": 1.5e4, "L": 1.0, "q_samples": 10, "transform": "sampled"},
    "burgers": {"p": 2, "gamma": 0.015, "N_e": 50, "dt": 1e-4, "t_end": 0.5, "rho": 10.0,
                "amp": 2.0 / (3.0 * math.sqrt(math.pi)), "k_max": 2048, "n_samples": 64,
                "seed": 0, "q_samples": 10, "spectrum": "alternative"},
}


def resolve_config(command: str, file_cfg: dict, overrides: dict) -> dict:
    """Merge file values, flag overrides and defaults; validate every key."""
    raw = dict(file_cfg)
    raw.update(overrides)
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "command" in raw and raw["command"] != command:
        raise ConfigError("command", f"config is for {raw['command']!r}, ran {command!r}")
    cfg = {k: SCHEMA[k](k, v) for k, v in raw.items()}
    cfg["command"] = command
    defaults = dict(COMMON_DEFAULTS)
    if command == "solve":
        cfg.setdefault("experiment", "fourier_mode")
        defaults.update(EXPERIMENT_DEFAULTS[cfg["experiment"]])
    else:
        defaults.update(COMMAND_DEFAULTS[command])
    if "dt" in raw and "dtau" in raw:
        raise ConfigError("dtau", "give only one of dt and dtau")
    for k, v in defaults.items():
        if k in ("dt", "dtau") and ("dt" in raw or "dtau" in raw):
            continue
        cfg.setdefault(k, v)
    _check_command(cfg)
    return dict(sorted(cfg.items()))


def _scalar(cfg, key):
    v = cfg[key]
    if isinstance(v, list):
        if len(v) != 1:
            raise ConfigError(key, f"{cfg['command']} takes a single value, got {v}")
        v = v[0]
        cfg[key] = v
    return v


def _check_command(cfg):
    cmd = cfg["command"]
    if cmd in ("analyze", "solve"):
        for key in ("formulation", "p", "eta"):
            _scalar(cfg, key)
        _scheme(cfg)
    if cmd == "scan":
        for key in ("formulation", "p", "eta", "rk"):
            if not isinstance(cfg[key], list):
                cfg[key] = [cfg[key]]
        for p in cfg["p"]:
            if p < 1:
                raise ConfigError("p", f"polynomial degree must be >= 1, got {p}")
    if cmd == "solve":
        exp = cfg["experiment"]
        if cfg["N_e"] < 3:
            raise ConfigError("N_e", f"need at least 3 elements, got {cfg['N_e']}")
        if cfg["q_samples"] <= cfg["p"] + 1 and exp != "fourier_mode":
            raise ConfigError("q_samples", f"need more than p+1={cfg['p'] + 1} samples per element")
        if exp == "fourier_mode":
            try:
                ex.ring_mode(cfg["K_target"], cfg["N_e"], cfg["p"], cfg["L"])
            except ValueError as exc:
                raise ConfigError("K_target", str(exc)) from None
        if exp == "burgers":
            for key in ("n_samples", "k_max"):
                if cfg[key] < 1:
                    raise ConfigError(key, f"must be >= 1, got {cfg[key]}")
            if cfg["t_end"] < 0:
                raise ConfigError("t_end", f"must be non-negative, got {cfg['t_end']}")
        if exp != "burgers" and any(t < 0 for t in cfg["tau_p"]):
            raise ConfigError("tau_p", "must be non-negative")


def _scheme(cfg, formulation=None, p=None, eta=None) -> SchemeConfig:
    values = {"formulation": formulation or cfg["formulation"], "p": p or cfg["p"],
              "eta": cfg["eta"] if eta is None else eta}
    try:
        return SchemeConfig(values["formulation"], values["p"], values["eta"],
                            beta_switch=cfg["beta_switch"], gamma=cfg["gamma"])
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in ("p", "beta_switch", "gamma") if k in msg), "formulation")
        raise ConfigError(key, msg) from None


# ---------------------------------------------------------------------------
# output


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value, fmt):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt % float(value)
    return str(value)


class Writer:
    def __init__(self, out_dir: str, fmt: str, paper_precision: bool):
        self.out_dir = Path(out_dir)
        self.format = fmt
        self.paper = paper_precision
        self.written: list[str] = []

    def table(self, stem: str, header: list[str], rows):
        rows = [list(r) for r in rows]
        if self.format == "json":
            records = [{h: _json_value(v) for h, v in zip(header, r)} for r in rows]
            text = json.dumps(records, indent=1) + "\n"
            path = self.out_dir / f"{stem}.json"
        else:
            fmts = [self._column_format(h) for h in header]
            lines = [",".join(header)]
            lines += [",".join(_fmt(v, f) for v, f in zip(r, fmts)) for r in rows]
            text = "\n".join(lines) + "\n"
            path = self.out_dir / f"{stem}.csv"
        _atomic_write(path, text)
        self.written.append(path.name)
        return path

    def json(self, name: str, obj):
        path = self.out_dir / name
        _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
        self.written.append(path.name)
        return path

    def _column_format(self, col):
        if not self.paper:
            return FULL_PRECISION
        return PAPER_FORMATS.get(col, PAPER_DEFAULT)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


# ---------------------------------------------------------------------------
# commands


def _K_values(cfg) -> np.ndarray:
    g = cfg["K_grid"]
    return np.linspace(0.0, math.pi, g) if isinstance(g, int) else np.asarray(g, dtype=float)


def cmd_analyze(cfg: dict, out: Writer) -> int:
    scheme = _scheme(cfg)
    K = _K_values(cfg)
    profiles, table = analyze(scheme, K, cfg["tau_p"])
    for prof in profiles:
        rows = zip(prof.K, prof.G_true, prof.G_phys, prof.G_exact, prof.dG)
        out.table(f"profile_tau_p={prof.tau_p:g}", ["K", "G_true", "G_phys", "G_exact", "dG"], rows)
    p1 = (scheme.p + 1) ** 2
    mode_rows = []
    for i, k in enumerate(table.K):
        for j in range(table.lambdas.shape[1]):
            lam = table.lambdas[i, j]
            mode_rows.append((k, j + 1, lam.real, lam.imag, lam.real / p1, table.shares[i, j]))
    out.table("modes", ["K", "mode", "lambda_re", "lambda_im", "neg_Km2", "Gamma"], mode_rows)
    return EXIT_OK


def cmd_scan(cfg: dict, out: Writer) -> int:
    status = EXIT_OK
    if cfg["scan"] == "eta":
        rows = []
        for f in cfg["formulation"]:
            for p in cfg["p"]:
                e = min_eta_scan(f, p, default_eta_grid(f, p))
                if math.isnan(e):
                    status = EXIT_UNSTABLE
                rows.append((f, p, e))
        out.table("eta_min", ["formulation", "p", "eta_min"], rows)
        return status
    rows = []
    for f in cfg["formulation"]:
        for p in cfg["p"]:
            for eta in cfg["eta"]:
                scheme = _scheme(cfg, f, p, eta)
                for rk in cfg["rk"]:
                    try:
                        d = max_dtau_scan(scheme, rk)
                    except ValueError as exc:
                        logger.warning("%s: %s", scheme.label, exc)
                        d = math.nan
                        status = EXIT_UNSTABLE
                    rows.append((f, p, rk, eta, d))
    out.table("dtau_max", ["formulation", "p", "rk", "eta", "dtau_max"], rows)
    return status


def _blowup_row(ncols, t, exc):
    return [t] + [math.nan] * (ncols - 2) + [f"blowup: {exc}"]


def _solve_fourier(cfg, out: Writer, report: dict) -> int:
    scheme = _scheme(cfg)
    rows, history = [], []
    status = EXIT_OK
    taus = sorted(cfg["tau_p"])
    result = None
    for i, tp in enumerate(taus):
        hist = history if i == len(taus) - 1 else None
        try:
            r = ex.fourier_mode_experiment(
                scheme, cfg["K_target"], cfg["N_e"], cfg["dt"] if "dt" in cfg else _dt_from_dtau(cfg),
                tau_p=tp, rk=cfg["rk"], L=cfg["L"], history_every=1 if hist is not None else 0,
                history=hist)
        except BlowUpError as exc:
            status = EXIT_UNSTABLE
            hist_rows = [(t, e, e / history[0][1], "ok") for t, e in history]
            hist_rows.append(_blowup_row(4, exc.time, exc))
            out.table("history", ["t", "E_num", "G_num", "status"], hist_rows)
            report["blowup"] = str(exc)
            break
        result = r
        rows.append((tp, r.E_cos, r.E_sin, r.E_tot, r.E_init, r.G_num, r.G_exact, r.dG_num))
    out.table("fourier_mode", ["tau_p", "E_cos", "E_sin", "E_num", "E_init", "G_num", "G_exact",
                               "dG_num"], rows)
    if status == EXIT_OK and result is not None:
        e0 = result.E_init
        out.table("history", ["t", "E_num", "G_num", "status"],
                  [(t, e, e / e0, "ok") for t, e in result.history])
        x, u = sample_continuous(result.final, cfg["q_samples"])
        out.table("snapshot", ["x", "u_cos", "u_sin"], zip(x, u[0], u[1]))
        report.update({"E_init": result.E_init, "G_num": result.G_num, "dG_num": result.dG_num,
                       "E_cos": result.E_cos, "E_sin": result.E_sin, "tau_p": result.tau_p})
    return status


def _dt_from_dtau(cfg):
    h = cfg["L"] / cfg["N_e"]
    return cfg["dtau"] * h * h / cfg["gamma"]


def _solve_gaussian(cfg, out: Writer, report: dict) -> int:
    scheme = _scheme(cfg)
    case = ex.GaussianCase(b=cfg["b"], L=cfg["L"], gamma=cfg["gamma"])
    h = 2 * case.L / cfg["N_e"]
    dtau = cfg["dtau"] if "dtau" in cfg else cfg["gamma"] * cfg["dt"] / h**2
    history: list = []
    try:
        r = ex.gaussian_experiment(case, scheme, cfg["rk"], dtau, cfg["tau_p"], N_e=cfg["N_e"],
                                   q=cfg["q_samples"], transform=cfg["transform"],
                                   history=history)
    except BlowUpError as exc:
        rows = [(t, e, "ok") for t, e in history] + [_blowup_row(3, math.nan, exc)]
        out.table("energy", ["tau_p", "E_num", "status"], rows)
        report["blowup"] = str(exc)
        return EXIT_UNSTABLE
    out.table("gaussian_initial_fft", ["K", "E_exact", "E_projected"], zip(r.K, r.E0_exact, r.E0))
    rows = [(tp, k, g, ge) for i, tp in enumerate(r.tau_p)
            for k, g, ge in zip(r.K, r.G_num[i], r.G_exact[i])]
    out.table("gaussian_G", ["tau_p", "K", "G_num", "G_exact"], rows)
    out.table("energy", ["tau_p", "E_num", "status"], [(t, e, "ok") for t, e in history])
    x, u = sample_continuous(r.final, cfg["q_samples"])
    t_final = ex.tau_p_to_time(float(r.tau_p[-1]), h, scheme.p, case.gamma)
    out.table("snapshot", ["x", "u", "u_exact"], zip(x, u, ex.gaussian_exact(case, x, t_final)))
    report.update({"M_terms": case.M_terms, "tau_p": list(map(float, r.tau_p)),
                   "E_num": list(map(float, r.energy))})
    return EXIT_OK


def _solve_burgers(cfg, out: Writer, report: dict) -> int:
    case = ex.TurbulenceCase(rho=cfg["rho"], amp=cfg["amp"], k_max=cfg["k_max"],
                             n_samples=cfg["n_samples"], seed=cfg["seed"], N_e=cfg["N_e"],
                             p=cfg["p"], gamma=cfg["gamma"], spectrum=cfg["spectrum"])
    scheme = _scheme(cfg)
    kw = {"dt": cfg["dt"]} if "dt" in cfg else {"dtau": cfg["dtau"]}
    dt = kw.get("dt") or cfg["dtau"] * case.grid.h**2 / case.gamma
    r = ex.burgers_ensemble(case, scheme, cfg["rk"], t_end=cfg["t_end"], q=cfg["q_samples"],
                            pe_every=max(1, int(round(0.01 / dt))), **kw)
    out.table("spectrum", ["k", "E_mean", "E_std", "n_valid_samples"], r.spectrum.rows())
    out.table("spectrum_initial", ["k", "E_mean", "E_std", "n_valid_samples"],
              r.initial_spectrum.rows())
    header = ["t", "Pe_mean"] + [f"Pe_{i}" for i in r.sample_indices] + ["status"]
    rows = [[t, pm, *pe, "ok"] for t, pm, pe in zip(r.times, r.pe_mean, r.pe.T)]
    if r.flagged:
        rows.append([math.nan] * (len(header) - 1)
                    + [f"blowup: samples {','.join(map(str, r.failed))}"])
    out.table("pe_history", header, rows)
    report.update({"Pe_initial": float(r.pe_mean[0]), "Pe_final": float(r.pe_mean[-1]),
                   "failed_samples": r.failed, "n_valid_samples": r.spectrum.n_valid_samples})
    return EXIT_UNSTABLE if r.flagged else EXIT_OK


def cmd_solve(cfg: dict, out: Writer) -> int:
    report: dict = {"experiment": cfg["experiment"]}
    runner = {"fourier_mode": _solve_fourier, "gaussian": _solve_gaussian,
              "burgers": _solve_burgers}[cfg["experiment"]]
    status = runner(cfg, out, report)
    report["status"] = "ok" if status == EXIT_OK else "unstable"
    out.json("report.json", {k: _json_value(v) if not isinstance(v, list) else v
                             for k, v in report.items()})
    return status


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dgdiff", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        for key in SCHEMA:
            if key == "command":
                continue
            if key == "paper_precision":
                sp.add_argument("--paper_precision", "--paper-precision", nargs="?", const="true",
                                default=argparse.SUPPRESS)
            elif key in LIST_KEYS:
                sp.add_argument(f"--{key}", nargs="+", default=argparse.SUPPRESS)
            else:
                sp.add_argument(f"--{key}", default=argparse.SUPPRESS)
    return parser


def _flag_values(ns: argparse.Namespace) -> dict:
    out = {}
    for key in SCHEMA:
        if hasattr(ns, key):
            v = getattr(ns, key)
            if key in LIST_KEYS and isinstance(v, list) and len(v) == 1 and key not in ("tau_p",):
                v = v[0]
            if key == "K_grid" and isinstance(v, str):
                v = int(v) if v.isdigit() else [v]
            out[key] = v
    return out


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_cfg = {}
        if ns.config:
            try:
                with open(ns.config, encoding="utf-8") as fh:
                    file_cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError("config", f"cannot read {ns.config}: {exc}") from None
            if not isinstance(file_cfg, dict):
                raise ConfigError("config", "top level must be a JSON object")
        cfg = resolve_config(ns.cmd, file_cfg, _flag_values(ns))
    except ConfigError as exc:
        print(f"dgdiff: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Writer(cfg["out_dir"], cfg["format"], cfg["paper_precision"])
    out.json("config.json", cfg)
    try:
        status = {"analyze": cmd_analyze, "scan": cmd_scan, "solve": cmd_solve}[ns.cmd](cfg, out)
    except ConfigError as exc:
        print(f"dgdiff: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in out.written:
        logger.info("wrote %s", Path(cfg["out_dir"]) / name)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
