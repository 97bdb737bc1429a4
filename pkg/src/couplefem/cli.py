"""Experiment runner: convergence studies, robustness sweeps, conditioning
studies and the built-in half-circle adhesion example.

Subcommands: ``convergence``, ``sweep``, ``paper-example``.  Configuration
is a flat key=value file ('#' comments) which command-line flags override;
every output file embeds the full parameter set and a git-style content
hash of the configuration.  Exit codes: 0 pass, 1 usage error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import manufactured as mf
from .adhesion import AdhesionParameters
from .coupling import coupling_samples, interface_ops, twofield_load
from .cutfem import (
    CutStudyReport,
    GhostPenaltyConfig,
    assemble_cut_cohesive,
    assemble_cut_interface,
    assemble_cut_poisson,
    solve_cut_adhesive_contact,
)
from .errors import SingularSystemError
from .interface import InterfaceData, WeightScheme, assemble_nitsche_interface
from .levelset import LevelSet, classify_cut
from .mesh import build_structured_mesh, fit_interface_line
from .norms import scalar_errors, twofield_errors
from .robin import RobinParameters, assemble_dirichlet_nitsche, \
    assemble_robin_classic, assemble_robin_multiplier, assemble_robin_nitsche
from .solvers import estimate_condition, solve_linear
from .vtkio import write_vtk

_DEFAULTS = {
    "formulation": "nitsche",
    "eps": 1.0,
    "eps1": 2.0,
    "eps2": 0.5,
    "kappa": 0.5,
    "gamma0": 0.0,        # 0 = per-formulation default (10 boundary, 100 interface)
    "gamma_kappa": 10.0,
    "gamma_g": 0.1,
    "stab_weight": 1e-2,
    "sweep": "robin",
    "values": "",
    "h1_rate_min": 0.85,
    "h1_rate_max": 1.15,
    "l2_rate_min": 1.7,
    "l2_rate_max": 2.3,
    "newton_tol": 1e-10,
    "newton_max_iter": 30,
}

_KNOWN_KEYS = set(_DEFAULTS) | {"experiment", "levels", "out"}

_FORMULATIONS = ("nitsche", "multiplier", "classic", "cohesive", "contact",
                 "interface")


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    mesh_levels: list[int]
    formulation: str
    out_dir: Path
    params: dict = field(default_factory=dict)

    def get(self, key):
        return self.params[key]

    def echo_lines(self) -> list[str]:
        items = dict(self.params)
        items["experiment"] = self.experiment
        items["levels"] = ",".join(str(n) for n in self.mesh_levels)
        items["formulation"] = self.formulation
        return [f"# {k}={items[k]}" for k in sorted(items)]

    def content_hash(self) -> str:
        body = "\n".join(line[2:] for line in self.echo_lines()) + "\n"
        blob = f"blob {len(body.encode())}\0".encode() + body.encode()
        return hashlib.sha1(blob).hexdigest()


def parse_config_file(path) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = val
    return values


def _float(values, key):
    v = values.get(key, _DEFAULTS[key])
    try:
        return float(v)
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be a number, got {v!r}") from None


def build_config(experiment: str, file_values: dict, args) -> ExperimentConfig:
    values = dict(file_values)
    if args.out:
        values["out"] = args.out
    if args.formulation:
        values["formulation"] = args.formulation
    if args.level:
        values["levels"] = ",".join(str(n) for n in args.level)

    formulation = values.get("formulation", _DEFAULTS["formulation"])
    if formulation not in _FORMULATIONS:
        raise UsageError(f"unknown formulation {formulation!r}")

    default_levels = {"convergence": "8,16,32,64",
                      "sweep": "16",
                      "paper-example": "32,64"}[experiment]
    try:
        levels = [int(s) for s in values.get("levels", default_levels).split(",") if s]
    except ValueError:
        raise UsageError(f"levels must be integers: {values.get('levels')!r}") from None
    if not levels or any(n < 1 for n in levels):
        raise UsageError("levels must be positive integers")

    params = {k: _float(values, k) for k in _DEFAULTS if k not in
              ("formulation", "sweep", "values")}
    params["sweep"] = values.get("sweep", _DEFAULTS["sweep"])
    params["values"] = values.get("values", _DEFAULTS["values"])
    params["newton_max_iter"] = int(params["newton_max_iter"])
    return ExperimentConfig(
        experiment=experiment,
        mesh_levels=levels,
        formulation=formulation,
        out_dir=Path(values.get("out", "out")),
        params=params,
    )


def _csv_header(cfg: ExperimentConfig) -> list[str]:
    return (cfg.echo_lines()
            + [f"# config_sha1={cfg.content_hash()}",
               f"# generated={datetime.now(timezone.utc).isoformat()}"])


def _write_csv(cfg: ExperimentConfig, name: str, lines: list[str]) -> Path:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    path = cfg.out_dir / name
    path.write_text("\n".join(_csv_header(cfg) + lines) + "\n")
    return path


def _fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass
class ConvergenceTable:
    """Rows of (n, h_max, error_L2, error_H1_broken, rate_L2, rate_H1,
    dofs, solve_seconds); rates are log2 ratios of consecutive errors."""

    rows: list[tuple] = field(default_factory=list)

    def add(self, n, h_max, e_l2, e_h1, dofs, seconds):
        r_l2 = r_h1 = None
        if self.rows:
            _, _, p_l2, p_h1, *_ = self.rows[-1]
            r_l2 = math.log2(p_l2 / e_l2) if e_l2 > 0 else None
            r_h1 = math.log2(p_h1 / e_h1) if e_h1 > 0 else None
        self.rows.append((n, h_max, e_l2, e_h1, r_l2, r_h1, dofs, seconds))

    def csv_lines(self) -> list[str]:
        out = ["n,h_max,error_L2,error_H1_broken,rate_L2,rate_H1,dofs,solve_seconds"]
        for n, h, e2, e1, r2, r1, d, s in self.rows:
            out.append(",".join([
                str(n), _fmt(h), _fmt(e2), _fmt(e1),
                "" if r2 is None else _fmt(r2),
                "" if r1 is None else _fmt(r1),
                str(d), _fmt(s),
            ]))
        return out

    def rates(self):
        return [(r[4], r[5]) for r in self.rows[1:]]


def _solve_level(cfg: ExperimentConfig, n: int):
    """One convergence level: returns (e_l2, e_h1, dofs, seconds)."""
    p = cfg.params
    mesh = build_structured_mesh(n)
    gamma0 = p["gamma0"] or 10.0
    m = mf.sin_product()
    t0 = time.perf_counter()
    if cfg.formulation == "nitsche" and p["kappa"] == 0:
        system = assemble_dirichlet_nitsche(mesh, eps=p["eps"], gamma0=gamma0,
                                            f=m.f, g=m.u)
    elif cfg.formulation in ("nitsche", "classic", "multiplier"):
        u0, g = mf.robin_data(m, p["eps"])
        rp = RobinParameters(eps=p["eps"], kappa=p["kappa"],
                             gamma_kappa=p["gamma_kappa"], u0=u0, g=g, f=m.f)
        system = {
            "nitsche": assemble_robin_nitsche,
            "classic": assemble_robin_classic,
            "multiplier": lambda ms, rr: assemble_robin_multiplier(
                ms, rr, stab_weight=p["stab_weight"]),
        }[cfg.formulation](mesh, rp)
    elif cfg.formulation == "interface":
        gamma0 = p["gamma0"] or 100.0
        fam = mf.interface_column(p["eps1"], p["eps2"])
        topo = fit_interface_line(mesh, 0.5)
        d = InterfaceData(eps1=p["eps1"], eps2=p["eps2"], gamma0=gamma0,
                          f=fam.f)
        w = WeightScheme.harmonic_robust(p["eps1"], p["eps2"])
        system, space = assemble_nitsche_interface(
            mesh, topo, d, w, dirichlet_tags=("left", "right"),
            dirichlet_values=(fam.extras["u1"], fam.extras["u2"]))
        u = solve_linear(system)
        sec = time.perf_counter() - t0
        err = twofield_errors(mesh, space, u,
                              fam.extras["u1"], fam.extras["grad1"],
                              fam.extras["u2"], fam.extras["grad2"],
                              eps=(p["eps1"], p["eps2"]))
        return err["l2"], err["h1"], system.ndof, sec
    else:
        raise UsageError(
            f"no manufactured solution for formulation {cfg.formulation!r}")
    u = solve_linear(system)
    sec = time.perf_counter() - t0
    e_l2, e_h1 = scalar_errors(mesh, u[:mesh.num_vertices], m.u, m.grad)
    return e_l2, e_h1, system.ndof, sec


def run_convergence(cfg: ExperimentConfig) -> tuple[int, ConvergenceTable]:
    p = cfg.params
    table = ConvergenceTable()
    for n in cfg.mesh_levels:
        e_l2, e_h1, dofs, sec = _solve_level(cfg, n)
        table.add(n, math.sqrt(2.0) / n, e_l2, e_h1, dofs, sec)
    _write_csv(cfg, f"convergence_{cfg.formulation}.csv", table.csv_lines())
    ok = all(
        p["l2_rate_min"] <= r2 <= p["l2_rate_max"]
        and p["h1_rate_min"] <= r1 <= p["h1_rate_max"]
        for r2, r1 in table.rates()
    )
    return (0 if ok else 2), table


def _parse_values(cfg, default):
    raw = cfg.params.get("values", "")
    if not raw:
        return list(default)
    return [float(s) for s in raw.split(",") if s]


def run_sweep(cfg: ExperimentConfig) -> tuple[int, Path]:
    kind = cfg.params["sweep"]
    n = cfg.mesh_levels[0]
    if kind == "robin":
        lines = ["kappa,err_nitsche,err_multiplier,kappa2_classic,"
                 "kappa2_nitsche,kappa2_multiplier"]
        m = mf.quadratic_x()
        for kappa in _parse_values(cfg, (1e-8, 1e-4, 1.0, 1e4, 1e8)):
            mesh = build_structured_mesh(n)
            row = [kappa]
            errs = []
            conds = {}
            for name, fn in (("classic", assemble_robin_classic),
                             ("nitsche", assemble_robin_nitsche),
                             ("multiplier", assemble_robin_multiplier)):
                u0, g = mf.robin_data(m, cfg.params["eps"])
                rp = RobinParameters(eps=cfg.params["eps"], kappa=kappa,
                                     gamma_kappa=cfg.params["gamma_kappa"],
                                     u0=u0, g=g, f=m.f)
                try:
                    system = fn(mesh, rp)
                    conds[name] = estimate_condition(system, iters=40).kappa2
                    if name in ("nitsche", "multiplier"):
                        u = solve_linear(system)
                        e, _ = scalar_errors(mesh, u[:mesh.num_vertices], m.u, m.grad)
                        errs.append(e)
                except (ValueError, SingularSystemError):
                    conds[name] = float("nan")
                    if name in ("nitsche", "multiplier"):
                        errs.append(float("nan"))
            row += errs + [conds["classic"], conds["nitsche"], conds["multiplier"]]
            lines.append(",".join(_fmt(v) for v in row))
        path = _write_csv(cfg, "sweep_robin.csv", lines)
        return 0, path
    if kind == "contrast":
        lines = ["contrast,energy_error,kappa2"]
        for contrast in _parse_values(cfg, (1.0, 1e2, 1e4, 1e6)):
            eps1, eps2 = contrast, 1.0
            mesh = build_structured_mesh(n)
            fam = mf.interface_column(eps1, eps2)
            topo = fit_interface_line(mesh, 0.5)
            d = InterfaceData(eps1=eps1, eps2=eps2,
                              gamma0=cfg.params["gamma0"] or 100.0, f=fam.f)
            w = WeightScheme.harmonic_robust(eps1, eps2)
            system, space = assemble_nitsche_interface(
                mesh, topo, d, w, dirichlet_tags=("left", "right"),
                dirichlet_values=(fam.extras["u1"], fam.extras["u2"]))
            u = solve_linear(system)
            err = twofield_errors(mesh, space, u,
                                  fam.extras["u1"], fam.extras["grad1"],
                                  fam.extras["u2"], fam.extras["grad2"],
                                  eps=(eps1, eps2))
            k2 = estimate_condition(system, iters=40).kappa2
            lines.append(",".join(_fmt(v) for v in (contrast, err["energy"], k2)))
        path = _write_csv(cfg, "sweep_contrast.csv", lines)
        return 0, path
    if kind == "cut-conditioning":
        report = cut_conditioning_study(
            n, _parse_values(cfg, [10.0 ** -k for k in range(1, 9)]),
            gamma_g=cfg.params["gamma_g"],
            gamma0=cfg.params["gamma0"] or 10.0)
        path = _write_csv(cfg, "sweep_cut_conditioning.csv",
                          report.to_csv().strip().split("\n"))
        return 0, path
    raise UsageError(f"unknown sweep kind {kind!r}")


def cut_conditioning_study(n: int, offsets, gamma_g: float = 0.1,
                           gamma0: float = 10.0, iters: int = 40) -> CutStudyReport:
    """Condition estimates with/without ghost penalty over cut offsets."""
    k_with, k_without, errors = [], [], []
    for delta in offsets:
        xbar = 0.5 + delta
        mesh = build_structured_mesh(n)
        phi = LevelSet.vertical_line(xbar)
        cls = classify_cut(mesh, phi)
        m = mf.cut_column(xbar)
        sys_with, space = assemble_cut_poisson(
            mesh, cls, gamma0, GhostPenaltyConfig.from_classification(cls, gamma_g),
            f=m.f)
        sys_without, _ = assemble_cut_poisson(
            mesh, cls, gamma0, GhostPenaltyConfig.from_classification(cls, 0.0),
            f=m.f)
        k_with.append(estimate_condition(sys_with, iters=iters).kappa2)
        try:
            k_without.append(estimate_condition(sys_without, iters=iters).kappa2)
        except SingularSystemError:
            k_without.append(float("inf"))
        u = solve_linear(sys_with)
        _, h1 = scalar_errors(mesh, u, m.u, m.grad, space=space, cls=cls)
        errors.append(h1)
    return CutStudyReport(
        offsets=np.asarray(offsets), kappa2_with=np.asarray(k_with),
        kappa2_without=np.asarray(k_without), errors=np.asarray(errors),
    )


def _paper_example_setup(cfg, n):
    p = cfg.params
    mesh = build_structured_mesh(n)
    phi = LevelSet.half_circle(0.74)
    cls = classify_cut(mesh, phi)
    gp = GhostPenaltyConfig.from_classification(cls, p["gamma_g"])
    w = WeightScheme.geometric_cut()

    def f_low(x):
        return np.ones(len(np.atleast_2d(x)))

    def f_high(x):
        return np.full(len(np.atleast_2d(x)), -3.5)

    return mesh, cls, gp, w, f_low, f_high


def run_paper_example(cfg: ExperimentConfig):
    """The three interface laws on the half-circle cut configuration.

    (a) continuity via the cut Nitsche coupling, (b) the cohesive bond law,
    (c) one-sided adhesive contact; emits one VTK field per law on the
    finest level plus a summary CSV with the interface diagnostics.
    """
    p = cfg.params
    gamma0 = p["gamma0"] or 100.0
    tags = ("left", "bottom")
    newton = {"tol": p["newton_tol"], "max_iter": p["newton_max_iter"]}
    summary = ["level,run,max_jump,bond_residual_l2,min_lambda,"
               "kkt_constraint,kkt_multiplier,kkt_complementarity,newton_iters"]
    metrics = {"a": [], "b": []}
    finest = max(cfg.mesh_levels)
    vtk_fields = {}

    for n in cfg.mesh_levels:
        mesh, cls, gp, w, f_low, f_high = _paper_example_setup(cfg, n)
        d = InterfaceData(eps1=p["eps1"], eps2=p["eps2"], gamma0=gamma0)
        # run (a): continuity
        system, space, pieces = assemble_cut_interface(
            mesh, cls, d, w, gp, dirichlet_tags=tags)
        system.rhs[:] = twofield_load(mesh, space, f_low, cls,
                                      split_y=0.5, f_above=f_high)
        u_a = solve_linear(system)
        ops = interface_ops(mesh, space, pieces, p["eps1"], p["eps2"])
        s_a = coupling_samples(ops, u_a)
        max_jump_a = float(np.max(np.abs(s_a["val"])))
        metrics["a"].append(max_jump_a)
        summary.append(",".join([str(n), "a", _fmt(max_jump_a), "", "", "", "",
                                 "", ""]))

        # run (b): cohesive bond, kappa = 1/2
        ap = AdhesionParameters(kappa=p["kappa"], gamma_kappa=gamma0,
                                eps1=p["eps1"], eps2=p["eps2"], f=f_low)
        system_b, space_b, pieces_b, ops_b = assemble_cut_cohesive(
            mesh, cls, ap, w, gp, dirichlet_tags=tags,
            split_y=0.5, f_above=f_high)
        u_b = solve_linear(system_b)
        s_b = coupling_samples(ops_b, u_b)
        bond = s_b["val"] + ap.kappa * s_b["flux"]
        # L2(Gamma) residual of the bond law; the max norm stalls at the two
        # points where the interface meets the homogeneous Dirichlet boundary
        # (both traces are pinned there while the bond law wants a jump)
        bond_l2 = float(np.sqrt(np.sum(s_b["w"] * bond ** 2)))
        metrics["b"].append(bond_l2)
        summary.append(",".join([str(n), "b", _fmt(float(np.max(np.abs(s_b['val'])))),
                                 _fmt(bond_l2), "", "", "", "", ""]))

        # run (c): adhesive contact
        u_c, space_c, state, report, ops_c = solve_cut_adhesive_contact(
            mesh, cls, ap, w, gp, newton=newton, dirichlet_tags=tags,
            split_y=0.5, f_above=f_high)
        if not report.converged:
            return 2, summary, metrics
        kkt = state.kkt_residuals
        summary.append(",".join([
            str(n), "c", _fmt(float(np.max(state.gap))), "",
            _fmt(float(np.min(state.multiplier))),
            _fmt(kkt["constraint"]), _fmt(kkt["multiplier_sign"]),
            _fmt(kkt["complementarity"]), str(report.iterations)]))

        if n == finest:
            for name, (uu, sp) in (("continuity", (u_a, space)),
                                   ("cohesive", (u_b, space_b)),
                                   ("contact", (u_c, space_c))):
                vtk_fields[name] = (mesh, {
                    "u1": sp.vertex_values(uu, 1),
                    "u2": sp.vertex_values(uu, 2),
                })

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    title = f"cfg:{cfg.content_hash()} " + " ".join(
        ln[2:] for ln in cfg.echo_lines())
    for name, (mesh, fields) in vtk_fields.items():
        write_vtk(cfg.out_dir / f"paper_example_{name}.vtk", mesh, fields,
                  title=title)
    _write_csv(cfg, "paper_example_summary.csv", summary)
    return 0, summary, metrics


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="couplefem",
        description="Convergence, robustness and conditioning experiments "
                    "for the coupling formulations in this package.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("convergence", "sweep", "paper-example"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=str, default=None)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--level", type=int, action="append")
        sp.add_argument("--formulation", type=str, default=None)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = build_config(args.command, file_values, args)
        if args.command == "convergence":
            code, table = run_convergence(cfg)
            for line in table.csv_lines():
                print(line)
            if code != 0:
                print("convergence rates outside the configured brackets",
                      file=sys.stderr)
            return code
        if args.command == "sweep":
            code, path = run_sweep(cfg)
            print(f"wrote {path}")
            return code
        code, summary, _ = run_paper_example(cfg)
        for line in summary:
            print(line)
        if code != 0:
            print("newton failed to converge", file=sys.stderr)
        return code
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SingularSystemError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
