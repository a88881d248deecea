"""Command-line front end.

Subcommands: rates, sweep, optimize, bounds, resources, selfcheck. Options
can come from a JSON config file (--config); precedence is command line >
config file > defaults. Unknown config keys are rejected. Exit codes:
0 success, 2 configuration error, 3 selfcheck failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from .core import (
    ChannelParams,
    CodeParams,
    DetectorKind,
    DetectorParams,
    ErrorModelSpec,
    ModelKind,
    TiePolicy,
)
from .optimizer import (
    Objective,
    SearchSpace,
    default_l0_grid,
    grid_optimize,
    plob_bound,
    tgw_bound,
)
from .pipeline import evaluate_chain
from .resources import MuxParams, cpc_module_count, mux_source_count
from .selfcheck import run_selfcheck

_DEFAULTS: Dict[str, Any] = {
    "model": "loss",
    "n": 23,
    "m": 5,
    "l0_km": 2.4,
    "ltot_km": 1000.0,
    "latt_km": 22.0,
    "eta_d": 1.0,
    "eps": 0.0,
    "p_adv": 0.0,
    "nbar": 0.0,
    "kappa": None,
    "tie": "discard",
    "detector": None,
    "objective": "cost",
    "format": "json",
    "out": None,
    "seed": 20240901,
    "threads": None,
    "n_min": 1,
    "n_max": 60,
    "m_min": 1,
    "m_max": 8,
    "l0_min": 0.5,
    "l0_max": 10.0,
    "l0_step": 0.1,
    "axis": "l0",
    "grid": None,
    "matrices": False,
    "grid_out": None,
    "p_bm": 0.75,
    "eta_sg": 1.0,
    "p_sg": 0.999,
    "n_bm_boost": 4,
    "level": "quick",
}

_CHOICES = {
    "model": ("loss", "depol", "adv", "onoff", "dark"),
    "tie": ("discard", "accept"),
    "detector": ("pnrd", "onoff"),
    "objective": ("rate", "cost"),
    "format": ("json", "csv"),
    "axis": ("l0", "eps", "p-adv", "ltot"),
    "level": ("quick", "full"),
}

_TYPES: Dict[str, type] = {
    "n": int, "m": int, "kappa": int, "seed": int, "threads": int,
    "n_min": int, "n_max": int, "m_min": int, "m_max": int, "n_bm_boost": int,
    "l0_km": float, "ltot_km": float, "latt_km": float, "eta_d": float,
    "eps": float, "p_adv": float, "nbar": float, "l0_min": float,
    "l0_max": float, "l0_step": float, "p_bm": float, "eta_sg": float, "p_sg": float,
    "model": str, "tie": str, "detector": str, "objective": str,
    "format": str, "out": str, "axis": str, "grid": str, "grid_out": str, "level": str,
    "matrices": bool,
}


class ConfigError(ValueError):
    """Invalid configuration; reported with exit code 2."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _load_config_file(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a single JSON object")
    return data


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    want = _TYPES[key]
    if want is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"config key '{key}' must be a boolean")
    if want is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key '{key}' must be an integer")
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"config key '{key}' must be an integer")
        return int(value)
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key '{key}' must be a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"config key '{key}' must be a string")
    if key in _CHOICES and value not in _CHOICES[key]:
        raise ConfigError(f"config key '{key}' must be one of {_CHOICES[key]}, got '{value}'")
    return value


def resolve_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Merge defaults, config file, and explicit command-line flags."""
    cfg = dict(_DEFAULTS)
    path = getattr(args, "config", None)
    if path:
        file_cfg = _load_config_file(path)
        unknown = sorted(set(file_cfg) - set(_DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in file_cfg.items():
            cfg[key] = _coerce(key, value)
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = _coerce(key, value)
    return cfg


def _build_model(cfg: Dict[str, Any]) -> ErrorModelSpec:
    kind = ModelKind(cfg["model"])
    tie = TiePolicy.DISCARD if cfg["tie"] == "discard" else TiePolicy.ACCEPT_AS_ONE
    try:
        if kind is ModelKind.LOSS:
            return ErrorModelSpec.loss()
        if kind is ModelKind.DEPOL:
            return ErrorModelSpec.depol(cfg["eps"])
        if kind is ModelKind.ADVANCED:
            return ErrorModelSpec.advanced(cfg["p_adv"])
        if kind is ModelKind.ONOFF:
            return ErrorModelSpec.onoff(cfg["eps"], cfg["kappa"], tie)
        return ErrorModelSpec.dark()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_detector(cfg: Dict[str, Any], model: ErrorModelSpec) -> DetectorParams:
    if cfg["detector"] is None:
        kind = DetectorKind.ON_OFF if model.kind is ModelKind.ONOFF else DetectorKind.PNRD
    else:
        kind = DetectorKind.PNRD if cfg["detector"] == "pnrd" else DetectorKind.ON_OFF
    if model.kind is ModelKind.ONOFF and kind is not DetectorKind.ON_OFF:
        raise ConfigError("the on-off model requires --detector onoff")
    if model.kind is not ModelKind.ONOFF and kind is DetectorKind.ON_OFF:
        raise ConfigError(f"the {model.kind.value} model requires --detector pnrd")
    try:
        return DetectorParams(cfg["eta_d"], cfg["nbar"], kind)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_point(cfg: Dict[str, Any]):
    model = _build_model(cfg)
    detector = _build_detector(cfg, model)
    try:
        code = CodeParams(cfg["n"], cfg["m"])
        channel = ChannelParams(cfg["ltot_km"], cfg["l0_km"], cfg["latt_km"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return code, channel, detector, model


def _echo_config(cfg: Dict[str, Any], keys: Sequence[str]) -> Dict[str, Any]:
    return {k: cfg[k] for k in keys}

_POINT_KEYS = (
    "model", "n", "m", "l0_km", "ltot_km", "latt_km", "eta_d", "eps",
    "p_adv", "nbar", "kappa", "tie", "detector",
)


def _emit(cfg: Dict[str, Any], payload: Dict[str, Any], csv_lines: List[str]) -> None:
    if cfg["format"] == "json":
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        text = "\n".join(csv_lines)
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_rates(cfg: Dict[str, Any]) -> int:
    code, channel, detector, model = _build_point(cfg)
    try:
        res = evaluate_chain(code, channel, detector, model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload: Dict[str, Any] = {
        "config": _echo_config(cfg, _POINT_KEYS),
        "p_trans": res.report.p_trans,
        "q_x": res.report.q_x,
        "q_z": res.report.q_z,
        "q": res.report.q,
        "r_t0": res.report.r_t0,
        "r_t0_unclamped": res.report.r_t0_unclamped,
        "per_mode_rate": res.per_mode_rate,
        "bm_stats": {
            "l_id": res.stats.l_id,
            "l_x": res.stats.l_x,
            "l_y": res.stats.l_y,
            "l_z": res.stats.l_z,
        },
    }
    if cfg["matrices"]:
        payload["matrices"] = {
            "P": res.physical.values.tolist(),
            "B": res.block.values.tolist(),
            "L": res.logical.values.tolist(),
        }
    fields = ["p_trans", "q_x", "q_z", "q", "r_t0", "r_t0_unclamped", "per_mode_rate"]
    csv_lines = [",".join(fields), ",".join(_fmt(payload[f]) for f in fields)]
    _emit(cfg, payload, csv_lines)
    return 0


def _parse_grid(spec: Optional[str], lo: float, hi: float, step: float) -> List[float]:
    if spec is None:
        count = int(round((hi - lo) / step))
        return [round(lo + i * step, 10) for i in range(count + 1)]
    try:
        if ":" in spec:
            parts = [float(x) for x in spec.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            glo, ghi, gstep = parts
            count = int(math.floor((ghi - glo) / gstep + 1e-9))
            return [round(glo + i * gstep, 10) for i in range(count + 1)]
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid spec '{spec}' (use lo:hi:step or v1,v2,...)") from exc


def cmd_sweep(cfg: Dict[str, Any]) -> int:
    axis = cfg["axis"]
    if axis == "l0":
        grid = _parse_grid(cfg["grid"], cfg["l0_min"], cfg["l0_max"], cfg["l0_step"])
    elif axis == "ltot":
        grid = _parse_grid(cfg["grid"], 100.0, 5000.0, 100.0)
    else:
        if cfg["grid"] is None:
            raise ConfigError(f"axis '{axis}' needs an explicit --grid")
        grid = _parse_grid(cfg["grid"], 0.0, 0.0, 1.0)
    rows = []
    for value in grid:
        point = dict(cfg)
        if axis == "l0":
            point["l0_km"] = value
        elif axis == "eps":
            point["eps"] = value
        elif axis == "p-adv":
            point["p_adv"] = value
        else:
            point["ltot_km"] = value
        code, channel, detector, model = _build_point(point)
        res = evaluate_chain(code, channel, detector, model)
        eta_ch = math.exp(-point["ltot_km"] / point["latt_km"])
        rows.append(
            {
                "value": value,
                "p_trans": res.report.p_trans,
                "q": res.report.q,
                "r_t0": res.report.r_t0,
                "per_mode_rate": res.per_mode_rate,
                "tgw": tgw_bound(eta_ch),
                "plob": plob_bound(eta_ch),
            }
        )
    payload = {"config": _echo_config(cfg, _POINT_KEYS + ("axis",)), "rows": rows}
    fields = ["value", "p_trans", "q", "r_t0", "per_mode_rate", "tgw", "plob"]
    csv_lines = [",".join([axis] + fields[1:])]
    csv_lines += [",".join(_fmt(row[f]) for f in fields) for row in rows]
    _emit(cfg, payload, csv_lines)
    return 0


def cmd_optimize(cfg: Dict[str, Any]) -> int:
    model = _build_model(cfg)
    detector = _build_detector(cfg, model)
    l0_grid = tuple(_parse_grid(cfg["grid"], cfg["l0_min"], cfg["l0_max"], cfg["l0_step"]))
    try:
        space = SearchSpace(
            (cfg["n_min"], cfg["n_max"]),
            (cfg["m_min"], cfg["m_max"]),
            l0_grid,
            model,
            detector,
            cfg["ltot_km"],
            cfg["latt_km"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    objective = Objective.MAX_RATE if cfg["objective"] == "rate" else Objective.MIN_COST
    threads = cfg["threads"] if cfg["threads"] is not None else (os.cpu_count() or 1)
    outcome = grid_optimize(space, objective, threads=max(1, threads))
    if cfg["grid_out"]:
        fields = ["n", "m", "l0_km", "rate", "cost", "per_mode_rate", "p_trans", "qber"]
        with open(cfg["grid_out"], "w", encoding="utf-8") as fh:
            fh.write(",".join(fields) + "\n")
            for p in outcome.grid:
                fh.write(
                    f"{p.n},{p.m},{_fmt(p.l0_km)},{_fmt(p.rate)},{_fmt(p.cost)},"
                    f"{_fmt(p.per_mode_rate)},{_fmt(p.p_trans)},{_fmt(p.qber)}\n"
                )
    best = None
    if outcome.best is not None:
        best = {
            "n": outcome.best.code.n,
            "m": outcome.best.code.m,
            "l0_km": outcome.best.l0_km,
            "rate": outcome.best.rate,
            "cost": outcome.best.cost,
            "per_mode_rate": outcome.best.per_mode_rate,
        }
    payload = {
        "config": _echo_config(
            cfg,
            ("model", "objective", "ltot_km", "latt_km", "eta_d", "eps", "p_adv",
             "nbar", "kappa", "tie", "n_min", "n_max", "m_min", "m_max"),
        ),
        "best": best,
        "grid_points": len(outcome.grid),
    }
    if best is None:
        csv_lines = ["n,m,l0_km,rate,cost,per_mode_rate", "no feasible point"]
    else:
        csv_lines = [
            "n,m,l0_km,rate,cost,per_mode_rate",
            f"{best['n']},{best['m']},{_fmt(best['l0_km'])},{_fmt(best['rate'])},"
            f"{_fmt(best['cost'])},{_fmt(best['per_mode_rate'])}",
        ]
    _emit(cfg, payload, csv_lines)
    return 0


def cmd_bounds(cfg: Dict[str, Any]) -> int:
    grid = _parse_grid(cfg["grid"], 100.0, 5000.0, 100.0)
    rows = []
    for ltot in grid:
        eta_ch = math.exp(-ltot / cfg["latt_km"])
        rows.append({"ltot_km": ltot, "eta": eta_ch, "tgw": tgw_bound(eta_ch), "plob": plob_bound(eta_ch)})
    payload = {"config": {"latt_km": cfg["latt_km"]}, "rows": rows}
    fields = ["ltot_km", "eta", "tgw", "plob"]
    csv_lines = [",".join(fields)]
    csv_lines += [",".join(_fmt(r[f]) for f in fields) for r in rows]
    _emit(cfg, payload, csv_lines)
    return 0


def cmd_resources(cfg: Dict[str, Any]) -> int:
    try:
        params = MuxParams(cfg["p_bm"], cfg["eta_sg"], cfg["p_sg"], cfg["n_bm_boost"])
        report = mux_source_count(cfg["n"], cfg["m"], params)
        modules = cpc_module_count(cfg["n"], cfg["m"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {
        "config": _echo_config(cfg, ("n", "m", "p_bm", "eta_sg", "p_sg", "n_bm_boost")),
        "cpc_modules": modules,
        "n_x": report.n_x,
        "n_tilde": report.n_tilde,
        "n_bm_total": report.n_bm_total,
        "n_s": report.n_s,
        "n_s_conservative": report.n_s_conservative,
    }
    fields = ["cpc_modules", "n_x", "n_tilde", "n_bm_total", "n_s", "n_s_conservative"]
    csv_lines = [",".join(fields), ",".join(_fmt(float(payload[f])) for f in fields)]
    _emit(cfg, payload, csv_lines)
    return 0


def cmd_selfcheck(cfg: Dict[str, Any]) -> int:
    results = run_selfcheck(cfg["level"])
    for res in results:
        print(f"{'ok  ' if res.ok else 'FAIL'} {res.name}: {res.detail}")
    failed = [r for r in results if not r.ok]
    if failed:
        print(f"selfcheck failed at: {failed[0].name}", file=sys.stderr)
        return 3
    print(f"selfcheck {cfg['level']}: {len(results)} checks passed")
    return 0


_COMMANDS = {
    "rates": cmd_rates,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "bounds": cmd_bounds,
    "resources": cmd_resources,
    "selfcheck": cmd_selfcheck,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; command line overrides it")
    sub.add_argument("--model", choices=_CHOICES["model"])
    sub.add_argument("--n", type=int)
    sub.add_argument("--m", type=int)
    sub.add_argument("--l0-km", dest="l0_km", type=float)
    sub.add_argument("--ltot-km", dest="ltot_km", type=float)
    sub.add_argument("--latt-km", dest="latt_km", type=float)
    sub.add_argument("--eta-d", dest="eta_d", type=float)
    sub.add_argument("--eps", type=float)
    sub.add_argument("--p-adv", dest="p_adv", type=float)
    sub.add_argument("--nbar", type=float)
    sub.add_argument("--kappa", type=int)
    sub.add_argument("--tie", choices=_CHOICES["tie"])
    sub.add_argument("--detector", choices=_CHOICES["detector"])
    sub.add_argument("--objective", choices=_CHOICES["objective"])
    sub.add_argument("--format", choices=_CHOICES["format"])
    sub.add_argument("--out")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--threads", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpcrepeater",
        description="Secure-key-rate analysis for parity-code one-way repeater chains",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("rates", help="evaluate one (code, channel, model) point")
    _add_common(sub)
    sub.add_argument("--matrices", action="store_const", const=True, default=None,
                     help="include P, B, L matrices in the JSON output")

    sub = subs.add_parser("sweep", help="vary one axis and tabulate rates")
    _add_common(sub)
    sub.add_argument("--axis", choices=_CHOICES["axis"])
    sub.add_argument("--grid", help="lo:hi:step or comma-separated values")

    sub = subs.add_parser("optimize", help="grid search over (n, m, L0)")
    _add_common(sub)
    sub.add_argument("--n-min", dest="n_min", type=int)
    sub.add_argument("--n-max", dest="n_max", type=int)
    sub.add_argument("--m-min", dest="m_min", type=int)
    sub.add_argument("--m-max", dest="m_max", type=int)
    sub.add_argument("--l0-min", dest="l0_min", type=float)
    sub.add_argument("--l0-max", dest="l0_max", type=float)
    sub.add_argument("--l0-step", dest="l0_step", type=float)
    sub.add_argument("--grid", help="explicit L0 grid, lo:hi:step or comma list")
    sub.add_argument("--grid-out", dest="grid_out", help="write the full grid dump as CSV")

    sub = subs.add_parser("bounds", help="TGW/PLOB bound table over total distance")
    _add_common(sub)
    sub.add_argument("--grid", help="distance grid, lo:hi:step or comma list")

    sub = subs.add_parser("resources", help="state-generation source counts")
    _add_common(sub)
    sub.add_argument("--p-bm", dest="p_bm", type=float)
    sub.add_argument("--eta-sg", dest="eta_sg", type=float)
    sub.add_argument("--p-sg", dest="p_sg", type=float)
    sub.add_argument("--n-bm-boost", dest="n_bm_boost", type=int)

    sub = subs.add_parser("selfcheck", help="run the built-in invariant suites")
    _add_common(sub)
    sub.add_argument("--level", choices=_CHOICES["level"])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
