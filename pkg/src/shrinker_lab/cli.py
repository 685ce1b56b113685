"""Batch experiment runner: ``shrinker-lab <experiment> [options]``.

Exit codes: 0 all checks pass, 1 usage error, 2 a tolerance check failed,
3 the entropy optimizer failed, 4 a flow lost resolution.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import flowsim, gaussian, shrinker
from .config import Tolerances
from .errors import OptimizerDidNotConverge, ResolutionLost
from .families import FamilyId, clifford_torus, eigenspace_basis, make_surface, normal_laplacian
from .geometry import QuadratureGrid
from .report import Report, write_svg_plot

EXPERIMENTS = ("entropy", "taylor", "stability", "obstruction", "flow")
FORMATS = ("csv", "json", "svg")

EXIT_OK, EXIT_USAGE, EXIT_TOLERANCE, EXIT_OPTIMIZER, EXIT_RESOLUTION = 0, 1, 2, 3, 4

DEFAULT_VECTORS = (
    (1.0, 0.0, 0.0, 0.0),
    (0.0, 1.0, 0.0, 0.0),
    (0.0, 0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0, 1.0),
    (1.0, 0.0, 1.0, 0.0),
    (0.0, 0.0, 0.0, 0.0),
    (1.0, 1.0, 0.0, 0.0),
    (0.5, -0.3, 0.2, 0.7),
)


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    grid: int = 64
    jet_order: int = 8
    out: Path = Path("shrinker-lab-out")
    formats: tuple = FORMATS
    tolerances: Tolerances = field(default_factory=Tolerances)
    entropy_s: tuple = (0.1, 0.2, 0.3)
    obstruction_samples: tuple = shrinker.DEFAULT_S_SAMPLES
    obstruction_vectors: tuple = DEFAULT_VECTORS
    flow: flowsim.FlowConfig = field(default_factory=flowsim.FlowConfig)
    flow_nodes: int = 128
    latitude_nodes: int = 64
    amplitude: float = 0.2

    def validate(self) -> None:
        if self.grid < 8 or self.grid % 2:
            raise UsageError(f"grid must be even and >= 8, got {self.grid}")
        if self.jet_order <= 0:
            raise UsageError("jet order must be positive")
        if not self.formats or any(f not in FORMATS for f in self.formats):
            raise UsageError(f"formats must be a non-empty subset of {FORMATS}")
        if self.flow_nodes < 8 or self.latitude_nodes < 8 or self.amplitude <= 0:
            raise UsageError("flow settings must be positive (nodes >= 8)")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def load_config(path: Path | None) -> ExperimentConfig:
    """Read an INI file into an :class:`ExperimentConfig` (missing keys keep defaults)."""
    cfg = ExperimentConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise UsageError(f"cannot read config file {path}")
    try:
        g = parser["general"] if parser.has_section("general") else {}
        cfg.grid = int(g.get("grid", cfg.grid))
        cfg.jet_order = int(g.get("jet_order", cfg.jet_order))
        cfg.out = Path(g.get("out", str(cfg.out)))
        if "formats" in g:
            cfg.formats = tuple(f.strip() for f in g["formats"].split(",") if f.strip())
        if parser.has_section("tolerances"):
            t = parser["tolerances"]
            cfg.tolerances = Tolerances(**{k: float(v) for k, v in t.items()})
        if parser.has_section("entropy") and "s_values" in parser["entropy"]:
            cfg.entropy_s = _floats(parser["entropy"]["s_values"])
        if parser.has_section("obstruction"):
            o = parser["obstruction"]
            if "s_samples" in o:
                cfg.obstruction_samples = _floats(o["s_samples"])
            if "vectors" in o:
                cfg.obstruction_vectors = tuple(_floats(v) for v in o["vectors"].split(";") if v.strip())
        if parser.has_section("flow"):
            f = parser["flow"]
            cfg.flow_nodes = int(f.get("nodes", cfg.flow_nodes))
            cfg.latitude_nodes = int(f.get("latitude_nodes", cfg.latitude_nodes))
            cfg.amplitude = float(f.get("amplitude", cfg.amplitude))
            updates = {}
            for key in ("dt_factor", "t_end", "length_tol", "hausdorff_tol", "spacing_ratio", "time_scale"):
                if key in f:
                    updates[key] = float(f[key])
            if "cadence" in f:
                updates["cadence"] = int(f["cadence"])
            cfg.flow = replace(cfg.flow, **updates)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid config value: {exc}") from exc
    return cfg


# -- experiments ------------------------------------------------------------------


def cmd_entropy(cfg: ExperimentConfig) -> Report:
    grid = QuadratureGrid(cfg.grid)
    rep = Report("entropy", {"grid": cfg.grid, "s_values": list(cfg.entropy_s)})
    base = gaussian.entropy(clifford_torus(), grid=grid, tol=cfg.tolerances)
    rep.add("entropy(Clifford)", base.value, gaussian.CLIFFORD_F, 1e-8)
    rep.add("argmax distance from (0,1)", float(np.linalg.norm(np.append(base.center.x0, base.center.t0 - 1.0))), 0.0, 1e-6)
    rows = [{"s": 0.0, "entropy": base.value, "t0": base.center.t0, "x0_norm": float(np.linalg.norm(base.center.x0))}]
    for s in cfg.entropy_s:
        r = gaussian.entropy(make_surface(FamilyId("A", s)), grid=grid, tol=cfg.tolerances)
        bound = gaussian.CLIFFORD_F - 2.0 * math.pi / (9.0 * math.e) * s**6
        rep.add(f"entropy(A, s={s:g}) below sextic bound", r.value, bound, 1e-6, mode="upper")
        rows.append({"s": s, "entropy": r.value, "t0": r.center.t0, "x0_norm": float(np.linalg.norm(r.center.x0))})
    if len(rows) > 1:
        values = [r["entropy"] for r in sorted(rows, key=lambda r: r["s"])]
        rep.add("entropy decreasing over the sweep", all(b < a for a, b in zip(values, values[1:])), 1, 0, mode="bool",
                kind="computed")
    rep.tables["entropy"] = rows
    return rep


def cmd_taylor(cfg: ExperimentConfig) -> Report:
    if cfg.jet_order < 8:
        raise UsageError(f"jet order must be at least 8 to see the s^8 remainder, got {cfg.jet_order}")
    grid = QuadratureGrid(cfg.grid)
    rep = Report("taylor", {"grid": cfg.grid, "jet_order": cfg.jet_order})
    c = gaussian.f_jet("A", cfg.jet_order, grid)
    rep.add("c0", c[0], gaussian.CLIFFORD_F, 1e-12, mode="rel")
    for k in range(1, 6):
        rep.add(f"c{k}", c[k], 0.0, 1e-10)
    rep.add("c6", c[6], gaussian.CLIFFORD_SEXTIC, 1e-6, mode="rel")
    fit = gaussian.sextic_by_least_squares(grid=grid)
    rep.add("c6 by least squares", fit.coefficients[fit.powers.index(6)], gaussian.CLIFFORD_SEXTIC, 1e-3, mode="rel",
            kind="computed")
    phi = 2.0 * np.pi * np.arange(64) / 64
    I = gaussian.integrand_I_jet(phi, max(cfg.jet_order, 6))
    ref = gaussian.integrand_reference(phi)
    for k in range(7):
        rep.add(f"I coefficient {k}", float(np.max(np.abs(I.coeffs[k] - ref[k]))), 0.0, 1e-10)
    t1, t2 = grid.nodes
    I2 = gaussian.integrand_I_jet(t1 + t2, 6)
    w = grid.weight
    rep.add("integral of I coefficient 4", math.fsum(I2.coeffs[4].ravel()) * w, 0.0, 1e-8)
    rep.add("integral of I coefficient 6", math.fsum(I2.coeffs[6].ravel()) * w, -8.0 * math.pi**2 / 9.0, 1e-8)
    rep.tables["f_jet"] = [{"k": k, "coefficient": float(v)} for k, v in enumerate(c)]
    return rep


def cmd_stability(cfg: ExperimentConfig) -> Report:
    grid = QuadratureGrid(cfg.grid)
    rep = Report("stability", {"grid": cfg.grid})
    for mu in (0.0, 0.5, 1.0):
        worst = max((normal_laplacian(V) - V * mu).sup() for V in eigenspace_basis(mu, grid))
        rep.add(f"eigenvalue {mu:g} residual", worst, 0.0, 1e-10)
    table = gaussian.hamiltonian_stability_report(grid)
    values = {r.name: r.value for r in table["rows"]}
    rep.add("U2", values["U2"], -32.0 * math.pi**2, 1e-6, mode="rel")
    for t in ("T10", "Ti0", "T01", "T0i"):
        rep.add(t, values[t], -2.0 * math.pi**2, 1e-6, mode="rel")
    for k in ("Y1", "Y2", "Y3", "Y4", "VA", "VB", "VC", "VD"):
        rep.add(k, values[k], 0.0, 1e-8)
    rep.add("eigenvalue-2 probe positive", values["cos2t1_JX1"] > 0, 1, 0, mode="bool", kind="computed")
    rep.add("negative Hamiltonian directions are translations", table["negative_hamiltonian_are_translations"], 1, 0,
            mode="bool", kind="computed")
    rep.tables["classification"] = [
        {"field": r.name, "second_variation": r.value, "class": r.classification, "hamiltonian": r.hamiltonian}
        for r in table["rows"]
    ]
    return rep


def obstruction_deviation(cubic, k) -> float:
    """Max deviation from the closed form, relative to ``max(|expected|, 1/8)``."""
    expected = shrinker.predicted_cubic(k)
    return float(np.max(np.abs(np.asarray(cubic) - expected)) / max(np.max(np.abs(expected)), 0.125))


def cmd_obstruction(cfg: ExperimentConfig) -> Report:
    grid = QuadratureGrid(cfg.grid)
    rep = Report("obstruction", {"grid": cfg.grid, "s_samples": list(cfg.obstruction_samples),
                                 "vectors": [list(v) for v in cfg.obstruction_vectors]})
    rows = []
    for k in cfg.obstruction_vectors:
        fit = shrinker.obstruction_cubic(k, cfg.obstruction_samples, grid, tol=cfg.tolerances)
        rep.add(f"cubic coefficients for {tuple(k)}", obstruction_deviation(fit.cubic, k), 0.0, 1e-3)
        rows.append({"k": list(k), "fitted": fit.cubic.tolist(), "expected": shrinker.predicted_cubic(k).tolist(),
                     "spread": fit.spread.tolist()})
    k = np.array([0.5, -0.3, 0.2, 0.7])
    base = shrinker.obstruction_cubic(k, cfg.obstruction_samples, grid, tol=cfg.tolerances).cubic
    for t in (0.5, 2.0):
        scaled = shrinker.obstruction_cubic(t * k, cfg.obstruction_samples, grid, tol=cfg.tolerances).cubic
        dev = float(np.max(np.abs(scaled - t**3 * base)) / np.max(np.abs(t**3 * base)))
        rep.add(f"cubic homogeneity t={t:g}", dev, 0.0, 1e-6, kind="identity")
    rep.tables["obstruction"] = rows
    return rep


def cmd_flow(cfg: ExperimentConfig) -> tuple[Report, dict]:
    rep = Report("flow", {"nodes": cfg.flow_nodes, "latitude_nodes": cfg.latitude_nodes, "amplitude": cfg.amplitude,
                          "dt_factor": cfg.flow.dt_factor, "t_end": cfg.flow.t_end, "time_scale": cfg.flow.time_scale})
    traces = {}
    bis = flowsim.run_flow(flowsim.perturbed_equator(cfg.amplitude, 3, cfg.flow_nodes), cfg.flow)
    traces["bisecting"] = bis
    area = bis.column("area_plus")
    energy = bis.column("energy")
    rep.add("bisecting verdict is converged-to-great-circle", bis.verdict == "converged-to-great-circle", 1, 0, mode="bool")
    rep.add("bisecting final distance to great circle", bis.rows[-1][6], 0.0, cfg.flow.hausdorff_tol)
    rep.add("bisecting max area deviation from 2pi", float(np.max(np.abs(area - 2.0 * math.pi))), 0.0, 1e-3)
    rep.add("energy increase between samples", float(max(0.0, np.max(np.diff(energy)))), 0.0, 1e-6)
    rep.add("final energy", energy[-1], gaussian.CLIFFORD_F, 1e-4)
    lat = flowsim.run_flow(flowsim.latitude(math.pi / 4, cfg.latitude_nodes), replace(cfg.flow, t_end=max(cfg.flow.t_end, 1.0)))
    traces["latitude"] = lat
    rep.add("latitude verdict is shrinking-to-point", lat.verdict == "shrinking-to-point", 1, 0, mode="bool")
    rep.add("latitude final length", lat.rows[-1][2], 0.0, cfg.flow.length_tol, mode="upper")
    eq = flowsim.run_flow(flowsim.equator(cfg.latitude_nodes), replace(cfg.flow, t_end=min(cfg.flow.t_end, 0.25)))
    traces["equator"] = eq
    rep.add("equator verdict is stationary", eq.verdict == "stationary", 1, 0, mode="bool")
    rep.tables["verdicts"] = {name: tr.verdict for name, tr in traces.items()}
    return rep, traces


# -- driver -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shrinker-lab", description="Numerical checks for the Clifford torus as a self-shrinker.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="INI file with [general], [entropy], [obstruction], [flow] sections")
    p.add_argument("--grid", type=int, help="grid points per circle (even, >= 8)")
    p.add_argument("--jet-order", type=int, dest="jet_order", help="Taylor truncation order")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--format", dest="formats", help="comma-separated subset of csv,json,svg")
    return p


def _apply_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.grid is not None:
        cfg.grid = args.grid
    if args.jet_order is not None:
        cfg.jet_order = args.jet_order
    if args.out is not None:
        cfg.out = args.out
    if args.formats is not None:
        cfg.formats = tuple(f.strip() for f in args.formats.split(",") if f.strip())
    return cfg


def _emit(rep: Report, cfg: ExperimentConfig, traces: dict | None = None) -> None:
    out = cfg.out
    out.mkdir(parents=True, exist_ok=True)
    name = rep.experiment
    if "json" in cfg.formats:
        rep.write_json(out / f"{name}.json")
    if "csv" in cfg.formats:
        rep.write_csv(out / f"{name}.csv")
        for label, tr in (traces or {}).items():
            tr.write_csv(out / f"flow_{label}.csv")
    if "svg" in cfg.formats:
        if traces:
            for label, tr in traces.items():
                t = tr.column("t")
                write_svg_plot(out / f"flow_{label}_length.svg", {"length": (t, tr.column("length"))},
                               f"{label}: length", "t")
                write_svg_plot(out / f"flow_{label}_areas.svg",
                               {"A+": (t, tr.column("area_plus")), "A-": (t, tr.column("area_minus"))},
                               f"{label}: enclosed areas", "t")
                write_svg_plot(out / f"flow_{label}_energy.svg", {"energy": (tr.column("tau"), tr.column("energy"))},
                               f"{label}: rescaled energy", "tau")
        elif name == "entropy":
            rows = rep.tables["entropy"]
            write_svg_plot(out / "entropy.svg", {"entropy": ([r["s"] for r in rows], [r["entropy"] for r in rows])},
                           "entropy of family A", "s")
        elif name == "taylor":
            rows = rep.tables["f_jet"]
            write_svg_plot(out / "taylor.svg", {"c_k": ([r["k"] for r in rows], [r["coefficient"] for r in rows])},
                           "Taylor coefficients of F(X(s), 0, 1)", "k")
        else:
            errs = [c.error for c in rep.checks]
            write_svg_plot(out / f"{name}.svg", {"error": (list(range(len(errs))), errs)}, f"{name}: check errors", "check")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(args.config), args)
        cfg.validate()
        start = time.perf_counter()
        traces = None
        if args.experiment == "flow":
            rep, traces = cmd_flow(cfg)
        else:
            rep = {"entropy": cmd_entropy, "taylor": cmd_taylor, "stability": cmd_stability,
                   "obstruction": cmd_obstruction}[args.experiment](cfg)
        rep.wall_time = time.perf_counter() - start
    except UsageError as exc:
        print(f"shrinker-lab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OptimizerDidNotConverge as exc:
        print(f"shrinker-lab: optimizer failure: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    except ResolutionLost as exc:
        print(f"shrinker-lab: flow resolution lost: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    _emit(rep, cfg, traces)
    for line in rep.summary_lines():
        print(line)
    print(f"{rep.experiment}: {'PASS' if rep.passed else 'FAIL'} ({rep.wall_time:.1f}s)")
    return EXIT_OK if rep.passed else EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
