"""Command-line driver.

Exit codes: 0 success, 2 configuration error, 3 numerical precondition error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import traceback
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import __version__
from .errors import ConfigError, PreconditionError
from .fields import Bump, Field, Gaussian, GridProfile, HarmonicComponent, PowerLaw, RadialGrid, WaveData, h1_norm, l2_norm

__all__ = ["RunConfig", "parse_config", "load_config", "build_parser", "main"]

GRID_DEFAULTS = {"n_r": 4096, "r_max": None, "n_s": 401, "s_max": 10.0, "n_nu": 1 << 16, "nu_max": 32 * math.pi}
SOLVER_DEFAULTS = {"t_max": 20.0, "snapshots": None}


@dataclass
class RunConfig:
    d: int
    u: WaveData
    radii: list
    grids: dict
    solver: dict
    output: Optional[str] = None
    seed: int = 0
    source: dict = field(default_factory=dict)

    @property
    def support(self) -> float:
        ends = [c.profile.r_end for f in (self.u.u0, self.u.u1) for c in f.components]
        return max(ends, default=0.0)

    def freq_grid(self):
        from .transform import FreqGrid

        return FreqGrid(float(self.grids["nu_max"]), int(self.grids["n_nu"]))

    def radial_grid(self) -> RadialGrid:
        r_max = self.grids["r_max"]
        if r_max is None:
            r_max = math.ceil(self.support + self.solver["t_max"] + 5.0)
        return RadialGrid(float(r_max), int(self.grids["n_r"]))

    def snapshot_times(self) -> tuple:
        snaps = self.solver["snapshots"]
        t_max = self.solver["t_max"]
        if snaps is None:
            snaps = [t_max / 4, t_max / 2]
        return tuple(float(t) for t in snaps)


# ---------------------------------------------------------------------------
# config parsing


def _num(obj, key, where, default=None, cast=float):
    if key not in obj:
        if default is None:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {val!r}")
    if cast is int and int(val) != val:
        raise ConfigError(f"{where}.{key}: expected an integer, got {val!r}")
    return cast(val)


def _amp(obj, where):
    a = obj.get("amp", 1.0)
    if isinstance(a, list) and len(a) == 2 and all(isinstance(x, (int, float)) for x in a):
        return complex(a[0], a[1])
    if isinstance(a, bool) or not isinstance(a, (int, float)):
        raise ConfigError(f"{where}.amp: expected a number or [re, im]")
    return float(a)


def parse_profile(prof, l: int, where: str):
    if not isinstance(prof, dict) or "kind" not in prof:
        raise ConfigError(f"{where}: profile must be an object with a 'kind'")
    kind = str(prof["kind"]).lower()
    amp = _amp(prof, where)
    if kind == "gaussian":
        return Gaussian(l, _num(prof, "sigma", where, 1.0), amp)
    if kind == "bump":
        return Bump(l, _num(prof, "a", where, 0.0), _num(prof, "b", where), amp)
    if kind == "powerlaw":
        inner = prof.get("inner", "none")
        if inner in ("none", None):
            inner = None
        elif inner in ("harmonic", "r^l"):
            inner = "harmonic"
        else:
            raise ConfigError(f"{where}.inner: expected 'none' or 'r^l', got {inner!r}")
        return PowerLaw(_num(prof, "alpha", where), _num(prof, "R", where), l, inner, amp)
    if kind == "grid":
        r, v = prof.get("r"), prof.get("values")
        if not isinstance(r, list) or not isinstance(v, list) or len(r) != len(v) or len(r) < 4:
            raise ConfigError(f"{where}: grid profile needs equal-length lists 'r' and 'values' (>= 4 nodes)")
        vals = np.array([complex(*x) if isinstance(x, list) else x for x in v])
        rr = np.asarray(r, dtype=float)
        if np.any(np.diff(rr) <= 0) or rr[0] <= 0:
            raise ConfigError(f"{where}.r: nodes must be positive and increasing")
        return GridProfile(rr, amp * vals, l)
    raise ConfigError(f"{where}.kind: unknown profile kind {prof['kind']!r} (gaussian, bump, powerlaw, grid)")


def parse_config(raw: dict, dimension: Optional[int] = None, radii=None, seed: Optional[int] = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    d = dimension if dimension is not None else raw.get("dimension")
    if d is None:
        raise ConfigError("config: missing 'dimension' (or pass --dimension)")
    if isinstance(d, bool) or not isinstance(d, int) or d < 2:
        raise ConfigError(f"config.dimension: expected an integer >= 2, got {d!r}")
    comps = {"u0": [], "u1": []}
    items = raw.get("components", [])
    if not isinstance(items, list):
        raise ConfigError("config.components: expected a list")
    for i, c in enumerate(items):
        where = f"components[{i}]"
        if not isinstance(c, dict):
            raise ConfigError(f"{where}: expected an object")
        role = c.get("role")
        if role not in comps:
            raise ConfigError(f"{where}.role: expected 'u0' or 'u1', got {role!r}")
        l = _num(c, "l", where, 0, int)
        if l < 0:
            raise ConfigError(f"{where}.l: degree must be non-negative")
        channel = c.get("channel")
        if channel is not None and not isinstance(channel, str):
            raise ConfigError(f"{where}.channel: expected a string")
        comps[role].append(HarmonicComponent(l, parse_profile(c.get("profile"), l, f"{where}.profile"), channel))
    u = WaveData(Field(d, tuple(comps["u0"])), Field(d, tuple(comps["u1"])))
    if radii is None:
        radii = raw.get("R", [0.0])
    if not isinstance(radii, list):
        radii = [radii]
    for R in radii:
        if isinstance(R, bool) or not isinstance(R, (int, float)) or R < 0:
            raise ConfigError(f"config.R: radii must be non-negative numbers, got {R!r}")
    grids = dict(GRID_DEFAULTS)
    g = raw.get("grids", {})
    if not isinstance(g, dict):
        raise ConfigError("config.grids: expected an object")
    for k, v in g.items():
        if k not in GRID_DEFAULTS:
            raise ConfigError(f"config.grids: unknown key {k!r}")
        if k == "r_max" and v is None:
            continue
        grids[k] = _num(g, k, "config.grids", cast=int if k.startswith("n_") else float)
    solver = dict(SOLVER_DEFAULTS)
    s = raw.get("solver", {})
    if not isinstance(s, dict):
        raise ConfigError("config.solver: expected an object")
    if "t_max" in s:
        solver["t_max"] = _num(s, "t_max", "config.solver")
    if "snapshots" in s:
        if not isinstance(s["snapshots"], list):
            raise ConfigError("config.solver.snapshots: expected a list of times")
        solver["snapshots"] = [float(x) for x in s["snapshots"]]
    if seed is None:
        seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("config.seed: expected an integer")
    return RunConfig(d, u, [float(R) for R in radii], grids, solver, raw.get("output"), seed, raw)


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def default_raw(d: int, l: int) -> dict:
    return {
        "dimension": d,
        "components": [
            {"role": "u0", "l": l, "profile": {"kind": "gaussian", "sigma": 1.0}},
            {"role": "u1", "l": l, "profile": {"kind": "gaussian", "sigma": 0.7, "amp": 0.5}},
        ],
    }


# ---------------------------------------------------------------------------
# output


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    return x


@lru_cache(maxsize=1)
def _audit() -> dict:
    from .transform import constant_audit

    return constant_audit()


def envelope(command: str, result, cfg: Optional[RunConfig] = None, **extra) -> dict:
    out = {"tool": "wavecone", "version": __version__, "command": command, "constant_audit": _audit()}
    if cfg is not None:
        out.update({"dimension": cfg.d, "seed": cfg.seed, "grids": cfg.grids, "solver": cfg.solver})
    out.update(extra)
    out["result"] = result
    return _jsonable(out)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def emit(out_dir: Optional[str], name: str, text: str):
    if out_dir is None:
        sys.stdout.write(text)
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv_rows(rows) -> str:
    lines = ["operator,channel,s,re,im"]
    for op, ch, s, vals in rows:
        for si, v in zip(s, vals):
            lines.append(f"{op},{ch},{si:.10g},{v.real:.12e},{v.imag:.12e}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_transform(cfg: RunConfig, path: str) -> str:
    from .transform import ds_t_op, half_wave_profiles, ray_trace, t_op, t_op_physical

    s_max, n_s = cfg.grids["s_max"], cfg.grids["n_s"]
    rows = []
    if path == "physical":
        if cfg.d % 2 == 0:
            raise PreconditionError("physical path requires odd dimension")
        s = np.linspace(-s_max, s_max, n_s)
        for role, fld, ops in (("u0", cfg.u.u0, (("T_u0", 0), ("dsT_u0", 1))), ("u1", cfg.u.u1, (("T_u1", 0),))):
            for key, ch in fld.channels().items():
                for name, m in ops:
                    rows.append((name, key, s, t_op_physical(ch, ch.l, cfg.d, s, m).values))
        return _csv_rows(rows)
    grid = cfg.freq_grid()
    sel = np.flatnonzero(np.abs(grid.s) <= s_max + 1e-12)
    stride = max(1, int(round(len(sel) / max(n_s, 1))))
    sel = sel[::stride]
    s = grid.s[sel]

    def add(name, profiles):
        for key in sorted(profiles):
            rows.append((name, key, s, profiles[key].values[sel]))

    add("T_u0", t_op(cfg.u.u0, grid))
    add("dsT_u0", ds_t_op(cfg.u.u0, grid))
    add("T_u1", t_op(cfg.u.u1, grid))
    f, g = half_wave_profiles(cfg.u)
    add("f_minus", ray_trace(f, -1, grid))
    add("g_plus", ray_trace(g, +1, grid))
    return _csv_rows(rows)


def _norms(u: WaveData) -> dict:
    e0, e1 = h1_norm(u.u0) ** 2, l2_norm(u.u1) ** 2
    return {"h1_sq_u0": e0, "l2_sq_u1": e1, "total_sq": e0 + e1}


def cmd_energy(cfg: RunConfig, path: str) -> dict:
    from .energy import ext_energy, ext_energy_even_closed_form, ext_energy_physical, ext_mass
    from .transform import half_wave_profiles

    grid = cfg.freq_grid()
    rows = []
    try:
        f, g = half_wave_profiles(cfg.u)
    except PreconditionError:
        f = g = None
    for R in cfg.radii:
        if path == "physical":
            if cfg.d % 2 == 0:
                raise PreconditionError("physical path requires odd dimension")
            row = {"R": R, "method": "formula-physical", "E_ext": ext_energy_physical(cfg.u, R)}
        else:
            row = ext_energy(cfg.u, R, grid).to_dict()
        row["ext_mass"] = ext_mass(f, g, R, grid) if f is not None else None
        if cfg.d % 2 == 0 and R == 0:
            E, fwd = ext_energy_even_closed_form(cfg.u)
            row["even_closed_form"] = {"method": "even-closed-form", "E_ext": E, "forward_grad_limit": fwd}
        rows.append(row)
    return {"norms": _norms(cfg.u), "reports": rows}


def cmd_kernel(d: int, l: int, radii) -> dict:
    from .kernelspaces import admissible_exponents, kernel_vanishing, nonradiative_table, polynomial_image_fit

    rows = []
    for R in radii:
        if not R > 0:
            raise ConfigError("kernel spaces need R > 0")
        kv = kernel_vanishing(d, l, R)
        pf = polynomial_image_fit(d, l, R)
        rows.append(
            {
                "R": R,
                "kernel_vanishing": kv,
                "max_relative_outside": max((r["relative"] for r in kv), default=0.0),
                "polynomial_image": pf,
                "max_polynomial_residual": max((r["residual"] for r in pf), default=0.0),
            }
        )
    return {
        "d": d,
        "l": l,
        "ladders": {k: admissible_exponents(d, l, k).to_dict() for k in ("L2", "H1")},
        "nonradiative_table": nonradiative_table(d, l, 2).to_dict(),
        "radii": rows,
    }


def cmd_project(cfg: RunConfig) -> dict:
    from .kernelspaces import channel_identity_residual, project

    rows = []
    for R in cfg.radii:
        if not R > 0:
            raise ConfigError("projection needs R > 0")
        _, _, r0 = project(cfg.u.u0, R, "H1")
        _, _, r1 = project(cfg.u.u1, R, "L2")
        rows.append(
            {
                "R": R,
                "u0_H1": r0.to_dict(),
                "u1_L2": r1.to_dict(),
                "projection_norm_sq": r0.norm_sq + r1.norm_sq,
                "channel_identity_residual": channel_identity_residual(cfg.u, R),
            }
        )
    return {"norms": _norms(cfg.u), "reports": rows}


def cmd_evolve(cfg: RunConfig):
    from .energy import ext_energy, ext_energy_even_closed_form
    from .evolve import TimeDomainExterior, exterior_split, snapshots_to_csv, solve_field

    grid = cfg.radial_grid()
    t_max = cfg.solver["t_max"]
    times = cfg.snapshot_times()
    if grid.r_max < cfg.support + t_max + 2.0:
        raise PreconditionError(f"r_max = {grid.r_max} cannot contain support + t_max + 2 = {cfg.support + t_max + 2.0}")
    fwd = solve_field(cfg.u, grid, t_max, times)
    bwd = solve_field(cfg.u.time_reversed(), grid, t_max, times)
    table = []
    for R in cfg.radii:
        a, b = exterior_split(fwd, R), exterior_split(bwd, R)
        keep = [k for k, row in enumerate(a) if row[0] > 0]
        td = TimeDomainExterior(R, [a[k][0] for k in keep], [a[k][1] for k in keep], [a[k][2] for k in keep], [b[k][1] for k in keep], [b[k][2] for k in keep])
        row = {"R": R, "time_domain": td.to_dict()}
        try:
            row["formula"] = ext_energy(cfg.u, R, cfg.freq_grid()).to_dict()
            ref = row["formula"]["E_ext"]
            if cfg.d % 2 == 0 and R == 0:
                E, _ = ext_energy_even_closed_form(cfg.u)
                row["even_closed_form"] = {"method": "even-closed-form", "E_ext": E}
                ref = E
            row["relative_gap_at_t_max"] = abs(td.E_ext[-1] - ref) / ref if ref else None
            row["relative_gap_extrapolated"] = abs(td.limit() - ref) / ref if ref else None
        except PreconditionError as exc:
            row["formula"] = {"unavailable": str(exc)}
        table.append(row)
    meta = {"n_r": grid.n, "r_max": grid.r_max, "h": grid.h, "t_max": t_max, "snapshots": list(times)}
    return snapshots_to_csv(fwd), {"radial_grid": meta, "norms": _norms(cfg.u), "table": table}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavecone", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wavecone {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("transform", "per-channel T, dsT and half-wave ray profiles as CSV"),
        ("energy", "exterior energy report per radius"),
        ("kernel", "kernel-space vanishing and polynomial-image report"),
        ("project", "projection onto the non-radiative space and channel identity"),
        ("evolve", "time-domain run: snapshots CSV plus measured vs formula table"),
        ("verify", "run the acceptance suite"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--dimension", type=int, metavar="D")
        sp.add_argument("--harmonic", type=int, default=0, metavar="L")
        sp.add_argument("--radius", type=float, action="append", metavar="R")
        sp.add_argument("--path", choices=("frequency", "physical"), default="frequency")
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--seed", type=int)
        if name == "verify":
            sp.add_argument("--check", type=int, action="append", metavar="N", help="run only criterion N (repeatable)")
    return p


def _module_tag(exc: BaseException) -> str:
    tb = exc.__traceback__
    mod = "wavecone.cli"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("wavecone"):
            mod = name
        tb = tb.tb_next
    return mod


def _config_for(args) -> RunConfig:
    if args.config:
        raw = load_config(args.config)
    else:
        raw = default_raw(args.dimension if args.dimension is not None else 3, args.harmonic)
    return parse_config(raw, args.dimension, args.radius, args.seed)


def _run(args) -> int:
    from .evolve import thread_count

    thread_count()  # validate WAVECONE_THREADS early
    cmd = args.command
    if cmd == "verify":
        from .acceptance import format_result, run_checks

        seed = args.seed if args.seed is not None else 0
        results = run_checks(args.check, echo=lambda line: print(line, flush=True), seed=seed)
        passed = all(r.passed for r in results)
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
        if args.out:
            report = envelope("verify", [r.to_dict() for r in results], seed=seed, all_passed=passed)
            emit(args.out, "verify.json", dumps(report))
        return 0 if passed else 1
    if cmd == "kernel":
        d = args.dimension if args.dimension is not None else 3
        radii = args.radius or [1.0]
        emit(args.out, "kernel.json", dumps(envelope("kernel", cmd_kernel(d, args.harmonic, radii), seed=args.seed or 0)))
        return 0
    cfg = _config_for(args)
    out = args.out or cfg.output
    if cmd == "transform":
        emit(out, "transform.csv", cmd_transform(cfg, args.path))
    elif cmd == "energy":
        emit(out, "energy.json", dumps(envelope("energy", cmd_energy(cfg, args.path), cfg, path=args.path)))
    elif cmd == "project":
        emit(out, "project.json", dumps(envelope("project", cmd_project(cfg), cfg)))
    elif cmd == "evolve":
        csv_text, table = cmd_evolve(cfg)
        if out is not None:
            emit(out, "snapshots.csv", csv_text)
        emit(out, "evolve.json", dumps(envelope("evolve", table, cfg)))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error ({_module_tag(exc)}): {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition error ({_module_tag(exc)}): {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0
    except Exception as exc:  # pragma: no cover - unexpected failures keep a traceback
        traceback.print_exc()
        print(f"internal error ({_module_tag(exc)}): {exc}", file=sys.stderr)
        return 1
