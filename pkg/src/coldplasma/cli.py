"""Command-line surface with bit-stable CSV/JSON output.

Every command writes a summary.json embedding the resolved configuration
plus whatever tables it produced. Verdicts are data: a blow-up exits 0;
exit 1 is reserved for usage errors and exit 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Dict, List, Optional, Sequence

import numpy as np

from .core import (ModelParams, _f_squared_on_curve, _rhs_phase,
                   classify_equilibria, phase_curve_geometry, phase_invariant)
from .criteria import (default_horizon, linearized_channels, phi_integral,
                       simulate_characteristic, theorem_two_report)
from .integrator import StepControl, integrate_compiled, pack_trajectory
from .pulses import GaussianPulse, load_profile
from .sweep import RGrid, critical_a, critical_nu, sweep_r, verify_theorem_3

SCHEMA_VERSION = "1"

_H1_FORMS = ("h0eq", "theorem2")
_FP_FORMS = ("sqrt", "literal")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract reserves 2 for numerics
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# formatting: every number is written with 17 significant digits

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return _fmt(x)


def _json_text(value, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        body = ",\n".join(f"{pad}  {json.dumps(str(k))}: "
                          f"{_json_text(v, indent + 1)}"
                          for k, v in value.items())
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if len(value) == 0:
            return "[]"
        body = ",\n".join(f"{pad}  {_json_text(v, indent + 1)}"
                          for v in value)
        return "[\n" + body + "\n" + pad + "]"
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isfinite(x):
            return f"{x:.17g}"
        return json.dumps(str(x))
    return json.dumps(str(value))


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_csv(path: str, header: str, rows) -> None:
    lines = [header]
    lines.extend(",".join(_cell(x) for x in row) for row in rows)
    _write_text(path, "\n".join(lines) + "\n")


def _write_summary(out_dir: str, doc: Dict) -> None:
    _write_text(os.path.join(out_dir, "summary.json"),
                _json_text(doc) + "\n")


# ---------------------------------------------------------------------------
# flag parsing and config resolution

_FILE_KEYS = {
    "d": int, "nu": float, "a": float, "r": float, "T": float,
    "horizon": float, "rel_tol": float, "abs_tol": float, "threads": int,
    "pulse": str, "grid": str, "out": str, "h1_form": str, "fp_form": str,
    "nu_schedule": str,
}


def _load_config(path: str) -> Dict:
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as err:
        raise _UsageError(f"cannot read config {path}: {err}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key or not val:
            raise _UsageError(f"{path}:{lineno}: expected `key = value`")
        if key not in _FILE_KEYS:
            raise _UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _FILE_KEYS[key](val)
        except ValueError:
            raise _UsageError(f"{path}:{lineno}: bad value for {key!r}")
    return values


def _build_parser() -> _Parser:
    shared = _Parser(add_help=False)
    shared.add_argument("--d", type=int)
    shared.add_argument("--nu", type=float)
    shared.add_argument("--pulse")
    shared.add_argument("--grid", help="rmin:rmax:step")
    shared.add_argument("--horizon", type=float)
    shared.add_argument("--rel-tol", type=float, dest="rel_tol")
    shared.add_argument("--abs-tol", type=float, dest="abs_tol")
    shared.add_argument("--out")
    shared.add_argument("--threads", type=int)
    shared.add_argument("--config")
    shared.add_argument("--h1-form", dest="h1_form", choices=_H1_FORMS)
    shared.add_argument("--fp-form", dest="fp_form", choices=_FP_FORMS)

    parser = _Parser(prog="coldplasma",
                     description="Collisional cold-plasma oscillations: "
                                 "blow-up detection and critical searches.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[shared])
    p.add_argument("--r", type=float)
    sub.add_parser("sweep", parents=[shared])
    p = sub.add_parser("critical-nu", parents=[shared])
    p.add_argument("--a", type=float)
    sub.add_parser("critical-a", parents=[shared])
    p = sub.add_parser("phase-portrait", parents=[shared])
    p.add_argument("--curve-through", dest="curve_through", action="append",
                   metavar="F,G")
    p = sub.add_parser("check-theorem2", parents=[shared])
    p.add_argument("--T", type=float, dest="T")
    p = sub.add_parser("verify-theorem3", parents=[shared])
    p.add_argument("--nu-schedule", dest="nu_schedule",
                   help="comma-separated increasing list")
    return parser


def _resolve(args) -> Dict:
    file_values = _load_config(args.config) if args.config else {}
    cfg = {"command": args.command, "config": args.config}
    for key in _FILE_KEYS:
        flag = getattr(args, key, None)
        cfg[key] = flag if flag is not None else file_values.get(key)
    cfg["curve_through"] = getattr(args, "curve_through", None)

    if cfg["out"] is None:
        cfg["out"] = "."
    if cfg["threads"] is None:
        env = os.environ.get("PLASMA_THREADS", "").strip()
        if env:
            try:
                cfg["threads"] = int(env)
            except ValueError:
                raise _UsageError(f"PLASMA_THREADS={env!r} is not an integer")
        else:
            cfg["threads"] = 1
    if cfg["threads"] < 1:
        raise _UsageError("--threads must be >= 1")
    if cfg["h1_form"] is None:
        cfg["h1_form"] = "h0eq"
    if cfg["fp_form"] is None:
        cfg["fp_form"] = "sqrt"
    if cfg["h1_form"] not in _H1_FORMS:
        raise _UsageError(f"h1_form must be one of {_H1_FORMS}")
    if cfg["fp_form"] not in _FP_FORMS:
        raise _UsageError(f"fp_form must be one of {_FP_FORMS}")
    defaults = StepControl()
    if cfg["rel_tol"] is None:
        cfg["rel_tol"] = defaults.rel_tol
    if cfg["abs_tol"] is None:
        cfg["abs_tol"] = defaults.abs_tol
    return cfg


def _require(cfg: Dict, key: str, flag: str):
    if cfg.get(key) is None:
        raise _UsageError(f"{cfg['command']} requires {flag}")
    return cfg[key]


def _control(cfg: Dict) -> StepControl:
    try:
        return StepControl(rel_tol=cfg["rel_tol"], abs_tol=cfg["abs_tol"])
    except ValueError as err:
        raise _UsageError(str(err))


def _grid(cfg: Dict) -> RGrid:
    txt = cfg["grid"]
    if txt is None:
        return RGrid()
    parts = txt.split(":")
    if len(parts) != 3:
        raise _UsageError("--grid expects rmin:rmax:step")
    try:
        lo, hi, step = (float(p) for p in parts)
        return RGrid(lo, hi, step)
    except ValueError as err:
        raise _UsageError(f"bad --grid: {err}")


def _pulse(cfg: Dict, params: Optional[ModelParams]):
    txt = _require(cfg, "pulse", "--pulse gaussian:a=... | file:path")
    kind, _, rest = txt.partition(":")
    if kind == "gaussian":
        key, _, val = rest.partition("=")
        if key.strip() != "a":
            raise _UsageError("gaussian pulse expects gaussian:a=VALUE")
        try:
            profile = GaussianPulse(float(val))
        except ValueError as err:
            raise _UsageError(str(err))
    elif kind == "file":
        try:
            profile = load_profile(rest)
        except (OSError, ValueError) as err:
            raise _UsageError(f"cannot load profile {rest!r}: {err}")
    else:
        raise _UsageError(f"unknown pulse kind {kind!r}")
    if params is not None:
        try:
            profile.check_params(params)
        except ValueError as err:
            raise _UsageError(str(err))
    return profile


def _params(cfg: Dict) -> ModelParams:
    d = _require(cfg, "d", "--d")
    nu = _require(cfg, "nu", "--nu")
    try:
        return ModelParams(d, nu)
    except ValueError as err:
        raise _UsageError(str(err))


def _config_echo(cfg: Dict) -> Dict:
    keys = ("command", "d", "nu", "a", "r", "T", "pulse", "grid", "horizon",
            "rel_tol", "abs_tol", "out", "threads", "h1_form", "fp_form",
            "nu_schedule", "curve_through", "config")
    return {k: cfg.get(k) for k in keys}


def _summary(cfg: Dict, result: Dict) -> Dict:
    return {"schema_version": SCHEMA_VERSION,
            "command": cfg["command"],
            "config": _config_echo(cfg),
            "result": result}


def _verdict_dict(verdict) -> Dict:
    fs = verdict.final_state
    return {
        "status": verdict.status,
        "q_min": verdict.q_min,
        "t_at_qmin": verdict.t_at_qmin,
        "t_final": verdict.t_final,
        "horizon": verdict.horizon,
        "tail_bound": verdict.tail_bound,
        "t_certified": verdict.t_certified,
        "t_star": verdict.t_star,
        "q_slope": verdict.q_slope,
        "reason": verdict.reason,
        "final_state": {"F": fs.F, "G": fs.G, "calF": fs.calF,
                        "H": fs.H, "Z": fs.Z, "Q": fs.Q},
    }


def _sweep_rows(result):
    for row in result.per_r:
        yield (row.r, row.q_min, row.t_at_qmin, row.status, row.t_blowup)


def _sweep_dict(result) -> Dict:
    return {"global_verdict": result.global_verdict,
            "worst_r": result.worst_r,
            "t_star": result.t_star,
            "n_r": len(result.per_r),
            "inconclusive_r": list(result.inconclusive_r)}


# ---------------------------------------------------------------------------
# commands

def _cmd_simulate(cfg: Dict) -> int:
    params = _params(cfg)
    profile = _pulse(cfg, params)
    r = _require(cfg, "r", "--r")
    control = _control(cfg)
    traj, verdict = simulate_characteristic(
        profile, r, params, horizon=cfg["horizon"], control=control,
        h1_form=cfg["h1_form"], store=True)
    _, _, _, _, n = linearized_channels(traj.times, traj.states, params)
    rows = ((t, *state, nn)
            for t, state, nn in zip(traj.times, traj.states, n))
    _write_csv(os.path.join(cfg["out"], "trajectory.csv"),
               "t,F,G,calF,H,Z,Q,n", rows)
    _write_summary(cfg["out"], _summary(cfg, _verdict_dict(verdict)))
    return 0


def _cmd_sweep(cfg: Dict) -> int:
    params = _params(cfg)
    profile = _pulse(cfg, params)
    result = sweep_r(profile, _grid(cfg), params, horizon=cfg["horizon"],
                     control=_control(cfg), h1_form=cfg["h1_form"],
                     threads=cfg["threads"])
    _write_csv(os.path.join(cfg["out"], "sweep.csv"),
               "r,q_min,t_at_qmin,status,t_blowup", _sweep_rows(result))
    _write_summary(cfg["out"], _summary(cfg, _sweep_dict(result)))
    return 0


def _search_dict(search) -> Dict:
    return {"target": search.target,
            "result": search.result,
            "bracket": list(search.bracket),
            "tol": search.tol,
            "bracket_history": [[p, blow]
                                for p, blow in search.bracket_history]}


def _cmd_critical_nu(cfg: Dict) -> int:
    d = _require(cfg, "d", "--d")
    if cfg["pulse"] is None and cfg["a"] is not None:
        cfg["pulse"] = f"gaussian:a={cfg['a']:.17g}"
    profile = _pulse(cfg, None)
    grid = _grid(cfg)
    control = _control(cfg)
    try:
        search = critical_nu(profile, d, grid, horizon=cfg["horizon"],
                             control=control, h1_form=cfg["h1_form"],
                             threads=cfg["threads"])
    except RuntimeError as err:
        _write_summary(cfg["out"], _summary(cfg, {"error": str(err)}))
        print(f"critical-nu failed: {err}", file=sys.stderr)
        return 2
    check = sweep_r(profile, grid, ModelParams(d, search.bracket[1]),
                    horizon=cfg["horizon"], control=control,
                    h1_form=cfg["h1_form"], threads=cfg["threads"])
    _write_csv(os.path.join(cfg["out"], "sweep.csv"),
               "r,q_min,t_at_qmin,status,t_blowup", _sweep_rows(check))
    doc = _search_dict(search)
    doc["verification"] = dict(_sweep_dict(check), nu=search.bracket[1])
    _write_summary(cfg["out"], _summary(cfg, doc))
    return 0


def _cmd_critical_a(cfg: Dict) -> int:
    d = _require(cfg, "d", "--d")
    nu = _require(cfg, "nu", "--nu")
    grid = _grid(cfg)
    control = _control(cfg)
    try:
        search = critical_a(d, nu, grid, horizon=cfg["horizon"],
                            control=control, h1_form=cfg["h1_form"],
                            threads=cfg["threads"])
    except RuntimeError as err:
        _write_summary(cfg["out"], _summary(cfg, {"error": str(err)}))
        print(f"critical-a failed: {err}", file=sys.stderr)
        return 2
    check = sweep_r(GaussianPulse(search.result), grid, ModelParams(d, nu),
                    horizon=cfg["horizon"], control=control,
                    h1_form=cfg["h1_form"], threads=cfg["threads"])
    _write_csv(os.path.join(cfg["out"], "sweep.csv"),
               "r,q_min,t_at_qmin,status,t_blowup", _sweep_rows(check))
    doc = _search_dict(search)
    doc["verification"] = dict(_sweep_dict(check), a=search.result)
    _write_summary(cfg["out"], _summary(cfg, doc))
    return 0


def _cmd_verify_theorem3(cfg: Dict) -> int:
    d = _require(cfg, "d", "--d")
    profile = _pulse(cfg, None)
    grid = _grid(cfg)
    control = _control(cfg)
    schedule = None
    if cfg["nu_schedule"] is not None:
        try:
            schedule = tuple(float(x) for x in cfg["nu_schedule"].split(","))
        except ValueError:
            raise _UsageError("--nu-schedule expects comma-separated numbers")
    try:
        scan = verify_theorem_3(profile, d, grid, nu_schedule=schedule,
                                horizon=cfg["horizon"], control=control,
                                h1_form=cfg["h1_form"],
                                threads=cfg["threads"])
    except ValueError as err:
        raise _UsageError(str(err))
    _write_csv(os.path.join(cfg["out"], "schedule.csv"), "nu,verdict",
               scan.entries)
    doc = {"nu": scan.nu, "satisfied": scan.satisfied,
           "entries": [[nu, verdict] for nu, verdict in scan.entries]}
    if scan.satisfied:
        check = sweep_r(profile, grid, ModelParams(d, scan.nu),
                        horizon=cfg["horizon"], control=control,
                        h1_form=cfg["h1_form"], threads=cfg["threads"])
        _write_csv(os.path.join(cfg["out"], "sweep.csv"),
                   "r,q_min,t_at_qmin,status,t_blowup", _sweep_rows(check))
        doc["verification"] = _sweep_dict(check)
    _write_summary(cfg["out"], _summary(cfg, doc))
    return 0


def _parse_point(txt: str):
    parts = txt.split(",")
    if len(parts) != 2:
        raise _UsageError("--curve-through expects F,G")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise _UsageError(f"bad --curve-through point {txt!r}")


def _cmd_phase_portrait(cfg: Dict) -> int:
    params = _params(cfg)
    d, nu = params.d, params.nu
    points = [_parse_point(p) for p in (cfg["curve_through"] or [])]
    for F0, G0 in points:
        if 1.0 - d * G0 <= 0.0:
            raise _UsageError(f"curve point G={G0:g} is not below 1/d")

    eq_rows = [(eq.F, eq.G, eq.kind) for eq in classify_equilibria(params)]
    _write_csv(os.path.join(cfg["out"], "equilibria.csv"), "F,G,kind",
               eq_rows)

    curve_rows: List = []
    curve_meta = []
    for idx, (F0, G0) in enumerate(points):
        c = phase_invariant(F0, G0, d)
        geo = phase_curve_geometry(F0, G0, params)
        gs = np.linspace(geo.g_minus, geo.g_plus, 257)
        upper = [math.sqrt(max(0.0, _f_squared_on_curve(g, c, d)))
                 for g in gs]
        for g, f in zip(gs, upper):
            curve_rows.append((idx, f, g))
        for g, f in zip(gs[::-1], upper[::-1]):
            curve_rows.append((idx, -f, g))
        curve_meta.append({"through": [F0, G0], "phi": c,
                           "g_minus": geo.g_minus, "g_plus": geo.g_plus})
    _write_csv(os.path.join(cfg["out"], "curves.csv"), "curve,F,G",
               curve_rows)

    horizon = cfg["horizon"]
    if horizon is None:
        horizon = min(default_horizon(nu), 100.0)
    control = _control(cfg)
    traj_rows: List = []
    for idx, (F0, G0) in enumerate(points):
        raw = integrate_compiled(_rhs_phase, np.array([F0, G0]),
                                 (0.0, horizon), params.as_array(), control,
                                 store=True)
        traj = pack_trajectory(raw)
        for t, state in zip(traj.times, traj.states):
            traj_rows.append((idx, t, state[0], state[1]))
    _write_csv(os.path.join(cfg["out"], "trajectories.csv"),
               "trajectory,t,F,G", traj_rows)

    result = {"equilibria": [{"F": F, "G": G, "kind": kind}
                             for F, G, kind in eq_rows],
              "curves": curve_meta,
              "horizon": horizon}
    _write_summary(cfg["out"], _summary(cfg, result))
    return 0


def _cmd_check_theorem2(cfg: Dict) -> int:
    params = _params(cfg)
    if not 0.0 < params.nu < 2.0:
        raise _UsageError("check-theorem2 needs 0 < nu < 2 "
                          "(hypothesis of the smoothness criteria)")
    profile = _pulse(cfg, params)
    grid = _grid(cfg)
    control = _control(cfg)
    T = cfg["T"] if cfg["T"] is not None else default_horizon(params.nu)
    r_values = grid.values()
    phi_value = phi_integral(profile, r_values, params, control=control)

    selected = cfg["h1_form"]
    other = "theorem2" if selected == "h0eq" else "h0eq"
    rows = []
    certified_global, smooth_to_T, blowup_certified = [], [], []
    for r in r_values:
        r = float(r)
        try:
            rep = theorem_two_report(profile, r, params, T,
                                     h1_form=selected, fp_form=cfg["fp_form"],
                                     phi_value=phi_value, control=control)
            alt = theorem_two_report(profile, r, params, T,
                                     h1_form=other, fp_form=cfg["fp_form"],
                                     phi_value=phi_value, control=control)
        except ValueError:
            rows.append((r, None, None, None, None, None, None, None,
                         0, None, None))
            continue
        f1_sel, f1_alt = rep.f1, alt.f1
        applicable = rep.f3 is not None
        deadline = (math.pi / math.sqrt(rep.j_plus)
                    if rep.j_plus > 0.0 else None)
        rows.append((r, rep.h0, rep.h1, alt.h1,
                     f1_sel, f1_alt, rep.f2_at_T,
                     rep.f3, 1 if applicable else 0,
                     rep.j_plus, deadline))
        if f1_sel is not None and f1_sel < 1.0:
            certified_global.append(r)
        if rep.f2_at_T is not None and rep.f2_at_T < 1.0:
            smooth_to_T.append(r)
        if applicable and rep.f3 >= 1.0:
            blowup_certified.append(r)

    header = (f"r,h0,h1_{selected},h1_{other},f1_{selected},f1_{other},"
              "f2_T,f3,f3_applicable,j_plus,deadline")
    _write_csv(os.path.join(cfg["out"], "theorem2.csv"), header, rows)
    result = {"T": T,
              "phi_integral": phi_value,
              "h1_form": selected,
              "n_r": len(rows),
              "certified_global": certified_global,
              "smooth_to_T": smooth_to_T,
              "blowup_certified": blowup_certified}
    _write_summary(cfg["out"], _summary(cfg, result))
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "critical-nu": _cmd_critical_nu,
    "critical-a": _cmd_critical_a,
    "phase-portrait": _cmd_phase_portrait,
    "check-theorem2": _cmd_check_theorem2,
    "verify-theorem3": _cmd_verify_theorem3,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _resolve(args)
        os.makedirs(cfg["out"], exist_ok=True)
        return _HANDLERS[cfg["command"]](cfg)
    except _UsageError as err:
        print(str(err), file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (RuntimeError, ArithmeticError, OSError) as err:
        print(f"failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
