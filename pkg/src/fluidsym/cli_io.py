"""Command-line entry point, run configuration and report serialization.

Every subcommand writes a JSON report of the form
``{"command": ..., "config": ..., "criteria": [{name, value, bound, pass}], ...}``
plus CSV data next to it. Exit codes: 0 success, 1 a criterion failed or the
model rejected the run, 2 invalid usage or configuration.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance, bargmann, emtensor, poisson, schrodinger
from .charges import GENERATORS, POINCARE_SET, SCHRODINGER_SET, all_charges, drift_scale
from .dynamics import (CausticError, DensityFloorError, Potential, evolve, membrane_datum, standard_datum,
                       windowed_plane_wave)
from .grid import FieldError, FieldMap2D, FieldPair, Grid1D

SUBCOMMANDS = ("simulate", "charges", "brackets", "algebra", "conformal", "transform", "emtensor",
               "schrodinger", "verify-all")
PRESETS = ("standard", "membrane", "windowed_plane_wave", "random_compact", "packet", "plane_wave")
POTENTIAL_KINDS = ("free", "power", "membrane", "conformal")


class ConfigError(ValueError):
    pass


# configuration


@dataclass
class RunConfig:
    n: int = 512
    L: float = 40.0
    potential: str = "free"
    c: float = 0.0
    omega: float = 0.0
    preset: str = "standard"
    beta: float = 0.5
    pedestal: float = 0.1
    seed: int = 0
    dt: float = 1e-3
    t_final: float = 1.0
    stride: int = 10
    transform: str = "antiboost"
    parameter: float = 0.2
    query_t: float = 0.0
    output: str = "results"
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        try:
            Grid1D(self.n, self.L)
        except ValueError as err:
            raise ConfigError(str(err)) from err
        if self.potential not in POTENTIAL_KINDS:
            raise ConfigError(f"unknown potential kind {self.potential!r}; choose from {', '.join(POTENTIAL_KINDS)}")
        if self.potential == "power" and self.c == 0.0:
            raise ConfigError("power potential needs a nonzero c")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {', '.join(PRESETS)}")
        if not self.dt > 0 or not self.t_final > 0:
            raise ConfigError("dt and t_final must be positive")
        if self.stride < 1:
            raise ConfigError("stride must be at least 1")
        if self.transform not in bargmann.MAP_NAMES:
            raise ConfigError(f"unknown transform {self.transform!r}")
        return self

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.n, self.L)

    def potential_object(self) -> Potential:
        if self.potential == "free":
            return Potential.free()
        if self.potential == "membrane":
            return Potential.membrane(self.c or 1.0)
        if self.potential == "conformal":
            return Potential.conformal(self.c or 1.0)
        return Potential.power(self.c, self.omega)

    def initial_state(self) -> FieldPair:
        g = self.grid
        if self.preset == "standard":
            return standard_datum(g)
        if self.preset == "membrane":
            return membrane_datum(g, pedestal=self.pedestal)
        if self.preset == "windowed_plane_wave":
            return windowed_plane_wave(g, self.beta)
        if self.preset == "random_compact":
            return poisson.random_compact_state(g, np.random.default_rng(self.seed), pedestal=self.pedestal)
        raise ConfigError(f"preset {self.preset!r} is a wave-field preset; use the schrodinger subcommand")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        return d


_CONFIG_KEYS = {
    "grid": {"n": int, "L": float},
    "potential": {"kind": str, "c": float, "omega": float},
    "initial": {"preset": str, "beta": float, "pedestal": float, "seed": int},
    "integrator": {"dt": float, "t_final": float, "stride": int},
    "transform": {"name": str, "parameter": float, "t": float},
    "output": {"directory": str},
}
_RENAME = {("potential", "kind"): "potential", ("transform", "name"): "transform",
           ("transform", "t"): "query_t", ("output", "directory"): "output"}


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a sectioned key = value file; unknown sections or keys are rejected."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    for section in parser.sections():
        if section not in _CONFIG_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _CONFIG_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            try:
                value = _CONFIG_KEYS[section][key](raw)
            except ValueError as err:
                raise ConfigError(f"bad value for {section}.{key}: {raw!r}") from err
            setattr(cfg, _RENAME.get((section, key), key), value)
    return cfg


# atomic output


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
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


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header: list, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def write_json(path: Path, payload: dict) -> None:
    write_atomic(path, json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n")


def criterion(name: str, value: float, bound: float, relation: str = "<=") -> dict:
    return acceptance.Check(name, float(value), float(bound), relation).as_dict()


# trajectory persistence


def save_trajectory(directory: Path, traj: FieldMap2D, meta: dict) -> None:
    directory = Path(directory)
    files = []
    for i in range(len(traj)):
        name = f"slice_{i:05d}.csv"
        write_atomic(directory / name, traj.slice(i).to_csv())
        files.append(name)
    manifest = {"grid": {"n": traj.grid.n, "L": traj.grid.L}, "times": traj.times, "files": files, **meta}
    write_json(directory / "manifest.json", manifest)


def load_trajectory(directory: Path) -> tuple:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    grid = manifest["grid"]
    pairs = [
        FieldPair.from_csv((directory / f).read_text(encoding="utf-8"), {"n": grid["n"], "L": grid["L"], "t": t})
        for f, t in zip(manifest["files"], manifest["times"])
    ]
    return FieldMap2D.from_pairs(pairs), manifest


# subcommands


def expected_conserved(pot: Potential) -> frozenset:
    if pot.kind == "free":
        return frozenset(GENERATORS)
    if pot.omega == -1.0:
        return POINCARE_SET
    if pot.omega == 3.0:
        return SCHRODINGER_SET
    return frozenset({g for g in SCHRODINGER_SET if g.value in ("H", "P", "B", "N")})


def _charge_table(traj: FieldMap2D, pot: Potential) -> tuple:
    rows, series = [], {g: [] for g in GENERATORS}
    for i in range(len(traj)):
        q = all_charges(traj.slice(i), pot)
        rows.append([traj.times[i]] + [q[g] for g in GENERATORS])
        for g in GENERATORS:
            series[g].append(q[g])
    drift = {g: float(np.max(np.abs(np.array(v) - v[0])) / drift_scale(v[0])) for g, v in series.items()}
    return rows, drift


def _charges_report(traj: FieldMap2D, pot: Potential, out: Path) -> list:
    rows, drift = _charge_table(traj, pot)
    write_atomic(out / "charges.csv", csv_text(["t"] + [g.value for g in GENERATORS], rows))
    keep = expected_conserved(pot)
    return [criterion(f"drift {g.value}", drift[g], 1e-6) for g in GENERATORS if g in keep] + [
        {"name": f"drift {g.value} (not expected conserved)", "value": drift[g], "bound": None, "pass": True}
        for g in GENERATORS if g not in keep
    ]


def cmd_simulate(cfg: RunConfig, args, out: Path) -> dict:
    pot = cfg.potential_object()
    traj = evolve(cfg.initial_state(), pot, cfg.dt, cfg.t_final, stride=cfg.stride)
    save_trajectory(out / "trajectory", traj, {"potential": {"kind": pot.kind, "c": pot.c, "omega": pot.omega},
                                              "dt": cfg.dt, "stride": cfg.stride})
    return {"criteria": _charges_report(traj, pot, out), "slices": len(traj)}


def cmd_charges(cfg: RunConfig, args, out: Path) -> dict:
    pot = cfg.potential_object()
    if args.trajectory:
        traj, manifest = load_trajectory(Path(args.trajectory))
        p = manifest.get("potential", {})
        if p:
            pot = Potential.free() if p["kind"] == "free" else Potential.power(p["c"], p["omega"])
    else:
        traj = evolve(cfg.initial_state(), pot, cfg.dt, cfg.t_final, stride=cfg.stride)
    return {"criteria": _charges_report(traj, pot, out)}


def cmd_brackets(cfg: RunConfig, args, out: Path) -> dict:
    pot = cfg.potential_object()
    state = cfg.initial_state()
    rows = poisson.verify_table(state, pot)
    write_atomic(out / "brackets.csv", csv_text(
        ["pair", "formula", "lhs_value", "rhs_value", "raw_residual", "residual"],
        [[r["pair"], r["formula"], r["lhs_value"], r["rhs_value"], r["raw_residual"], r["residual"]] for r in rows]))
    rng = np.random.default_rng(cfg.seed)
    random_worst = max(poisson.max_residual(poisson.verify_table(
        poisson.random_compact_state(cfg.grid, rng), pot)) for _ in range(args.random_states))
    return {
        "seed": cfg.seed,
        "table": rows,
        "criteria": [
            criterion("max relative residual (configured state)", poisson.max_residual(rows), 1e-7),
            criterion(f"max relative residual ({args.random_states} random states)", random_worst, 1e-7),
            criterion("antisymmetry", poisson.antisymmetry_residual(state, pot), 1e-10),
        ],
    }


def _from_result(res: acceptance.CriterionResult, extra: dict | None = None) -> dict:
    return {"criteria": [c.as_dict() for c in res.checks], "notes": res.notes, **(extra or {})}


def cmd_algebra(cfg: RunConfig, args, out: Path) -> dict:
    from . import liealg

    report = liealg.structure_table()
    rows = [[f"X{i}", f"X{j}", " ".join(str(c) for c in v)] for (i, j), v in report.table.items()]
    write_atomic(out / "vector_field_brackets.csv", csv_text(["left", "right", "coefficients_X0_to_X9"], rows))
    return _from_result(acceptance.criterion_lie_algebra(), {"structure": report.as_dict()})


def cmd_conformal(cfg: RunConfig, args, out: Path) -> dict:
    from . import conformal_matrix as cm

    rows = [[name, cm.schrodinger_condition(Z), cm.algebra_defect(Z)]
            for name, Z in zip(cm.GENERATOR_NAMES, cm.generator_matrices())]
    write_atomic(out / "generators.csv", csv_text(["generator", "commutes_with_vertical", "algebra_defect"], rows))
    return _from_result(acceptance.criterion_matrix(seed=cfg.seed or 7))


def cmd_transform(cfg: RunConfig, args, out: Path) -> dict:
    xq = np.linspace(-args.extent, args.extent, args.points)
    src = {
        "plane_wave": lambda: bargmann.plane_wave(cfg.beta),
        "spreading": bargmann.self_similar,
        "clock": lambda: bargmann.linear_phase(1.0, lambda x, t: 1.0 + 0.5 * np.exp(-(x**2) / 2) + 0 * t),
    }[args.source]()
    if cfg.transform == "interchange":
        sol = bargmann.interchange_transform(src, cfg.query_t, xq, window=tuple(args.window))
    else:
        sol = bargmann.project_transform(bargmann.extended_map(cfg.transform, cfg.parameter), src, cfg.query_t, xq)
    rows = sol.to_rows()
    write_atomic(out / "transform.csv", csv_text(list(rows[0]), [list(r.values()) for r in rows]))
    crit = [criterion("section residual", sol.max_residual, 1e-10)]
    try:
        closed = bargmann.named_transform(cfg.transform, cfg.parameter, src, cfg.query_t, xq)
        crit.append(criterion("Theta* vs closed form", np.max(np.abs(sol.Theta_star - closed.Theta_star)), 1e-10))
        crit.append(criterion("R* vs closed form (relative)",
                              np.max(np.abs(sol.R_star - closed.R_star) / np.abs(closed.R_star)), 1e-8))
    except (KeyError, ValueError):
        pass
    return {"transform": cfg.transform, "parameter": cfg.parameter, "criteria": crit}


def cmd_emtensor(cfg: RunConfig, args, out: Path) -> dict:
    pot = cfg.potential_object()
    state = cfg.initial_state()
    T = emtensor.tensor_Q(state, pot)
    trace = emtensor.trace_check(state, pot)
    write_atomic(out / "tensor_ordinary.csv", csv_text(
        ["x", "T_tt", "T_xt", "T_tx", "T_xx", "trace_residual"],
        zip(state.grid.x, T.tt, T.xt, T.tx, T.xx, trace)))
    rel = emtensor.relation_check(state, pot)
    q = all_charges(state, pot)
    worst = max(abs(emtensor.current(g, state, pot).Q_value - q[g]) / drift_scale(q[g]) for g in GENERATORS)
    crit = [
        criterion("tensor relation (uniform sign)", rel.max_residual(), 1e-10),
        criterion("current-based vs direct charges", worst, 1e-8),
    ]
    if pot.kind == "power" and pot.omega == 3.0:
        crit.append(criterion("trace identity", np.max(np.abs(trace)), 1e-13))
    return {"relation_sigma": rel.sigma, "printed_sign_residuals": rel.printed,
            "max_trace_residual": float(np.max(np.abs(trace))), "criteria": crit}


def cmd_schrodinger(cfg: RunConfig, args, out: Path) -> dict:
    g = cfg.grid
    nl = schrodinger.Nonlinearity.quintic(cfg.c) if args.quintic else schrodinger.Nonlinearity.linear()
    if cfg.preset == "plane_wave":
        psi0 = schrodinger.plane_wave(g, args.mode)
    else:
        psi0 = schrodinger.background_packet(g, momentum=cfg.beta, centre=0.5)
    traj = schrodinger.evolve_nls(psi0, nl, cfg.dt, cfg.t_final, stride=cfg.stride)
    hydro = traj.hydro()
    pot = nl.hydro_potential()
    save_trajectory(out / "trajectory", hydro, {"potential": {"kind": "schrodinger", "c": nl.c},
                                                "dt": cfg.dt, "stride": cfg.stride})
    n0 = psi0.norm()
    crit = [criterion("norm drift", max(abs(w.norm() - n0) for w in traj.slices()) / n0, 1e-12)]
    if nl.is_linear and cfg.preset != "plane_wave":
        rows, drift = _charge_table(hydro, pot)
        write_atomic(out / "charges.csv", csv_text(["t"] + [x.value for x in GENERATORS], rows))
        crit += [criterion(f"hydrodynamic drift {x.value}", drift[x], 1e-6) for x in GENERATORS if x in SCHRODINGER_SET]
    return {"criteria": crit}


def cmd_verify_all(cfg: RunConfig, args, out: Path) -> dict:
    numbers = [int(v) for v in args.only.split(",")] if args.only else None
    results = []
    for n in numbers or sorted(acceptance.CRITERIA):
        r = acceptance.run_criterion(n)
        print(r.summary_line(), flush=True)
        results.append(r)
    return {
        "all_pass": all(r.passed for r in results),
        "results": [r.as_dict() for r in results],
        "criteria": [{"name": f"{r.number}. {r.title}", "value": float(r.passed), "bound": 1.0, "pass": r.passed}
                     for r in results],
    }


COMMANDS = {
    "simulate": cmd_simulate,
    "charges": cmd_charges,
    "brackets": cmd_brackets,
    "algebra": cmd_algebra,
    "conformal": cmd_conformal,
    "transform": cmd_transform,
    "emtensor": cmd_emtensor,
    "schrodinger": cmd_schrodinger,
    "verify-all": cmd_verify_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sectioned key = value configuration file")
    common.add_argument("--out", help="output directory (default: results/<subcommand>)")
    common.add_argument("--n", type=int)
    common.add_argument("--L", type=float)
    common.add_argument("--potential", choices=POTENTIAL_KINDS)
    common.add_argument("--c", type=float)
    common.add_argument("--omega", type=float)
    common.add_argument("--preset", choices=PRESETS)
    common.add_argument("--beta", type=float)
    common.add_argument("--pedestal", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--dt", type=float)
    common.add_argument("--t-final", dest="t_final", type=float)
    common.add_argument("--stride", type=int)

    parser = argparse.ArgumentParser(prog="fluidsym", description="Symmetry checks for the 1-D irrotational fluid.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "charges":
            p.add_argument("--trajectory", help="directory written by 'simulate'")
        if name == "brackets":
            p.add_argument("--random-states", dest="random_states", type=int, default=5)
        if name == "transform":
            p.add_argument("--name", dest="transform", choices=bargmann.MAP_NAMES)
            p.add_argument("--parameter", type=float)
            p.add_argument("--t", dest="query_t", type=float)
            p.add_argument("--source", choices=("plane_wave", "spreading", "clock"), default="plane_wave",
                           help="analytic free solution; 'clock' has Theta = t and suits the interchange")
            p.add_argument("--window", nargs=2, type=float, default=(-2.0, 2.0), metavar=("LO", "HI"),
                           help="time window searched by the interchange")
            p.add_argument("--points", type=int, default=41)
            p.add_argument("--extent", type=float, default=2.0)
        if name == "schrodinger":
            p.add_argument("--quintic", action="store_true", help="use the sextic energy term with coefficient --c")
            p.add_argument("--mode", type=int, default=3, help="plane-wave mode number")
        if name == "verify-all":
            p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    for key in ("n", "L", "potential", "c", "omega", "preset", "beta", "pedestal", "seed", "dt", "t_final",
                "stride", "transform", "parameter", "query_t"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    if args.out:
        cfg.output = args.out
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        if args.command == "schrodinger" and cfg.preset not in ("packet", "plane_wave"):
            if args.preset is not None:
                raise ConfigError("the schrodinger subcommand takes --preset packet or plane_wave")
            cfg.preset = "packet"
        elif args.command != "schrodinger" and cfg.preset in ("packet", "plane_wave"):
            raise ConfigError(f"preset {cfg.preset!r} is only valid for the schrodinger subcommand")
        cfg.validate()
    except ConfigError as err:
        parser.print_usage(sys.stderr)
        print(f"fluidsym: error: {err}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path(cfg.output) / args.command
    try:
        payload = COMMANDS[args.command](cfg, args, out)
    except (DensityFloorError, CausticError, FieldError, bargmann.SectionSolveError, ValueError) as err:
        print(f"fluidsym {args.command}: {err}", file=sys.stderr)
        write_json(out / "report.json", {"command": args.command, "config": cfg.as_dict(), "error": str(err),
                                         "criteria": []})
        return 1
    payload = {"command": args.command, "config": cfg.as_dict(), **payload}
    write_json(out / "report.json", payload)
    failed = [c for c in payload.get("criteria", []) if not c.get("pass", True)]
    for c in failed:
        print(f"fluidsym {args.command}: criterion failed: {c['name']} = {c['value']} (bound {c['bound']})",
              file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
