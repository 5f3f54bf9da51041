"""Command-line front end.

Subcommands: ``run`` (one case), ``converge`` (mesh sweep), ``compare``
(scheme variants on one case) and ``tables`` (all convergence tables).
Exit status 0 on success, 2 for configuration errors and 3 for solver
failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from dualweno.errors import ConfigurationError, SimulationBlowUp, SolverStagnationError
from dualweno.output import RunManifest, write_csv, write_vtk_rectilinear

from dualweno.cases.config import CaseConfig, config_from_dict, emit_config, parse_config
from dualweno.cases.convergence import ConvergenceReport

OUT_ENV = "DUALWENO_OUT"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

TABLE_CASES = {
    "table1-loc": dict(case="conv1d", variant="weno5-loc"),
    "table1-js": dict(case="conv1d", variant="weno5-js"),
    "table1-central5": dict(case="conv1d", variant="central5"),
    "table2-loc-eps1": dict(case="conv1d", variant="weno5-loc", epsilon=1.0),
    "table3-delta1": dict(case="conv1d", variant="weno5-loc", delta=1.0),
    "table3-delta3": dict(case="conv1d", variant="weno5-loc", delta=3.0),
    "table4-delta3": dict(case="diff1d", delta=3.0),
    "table4-delta4.5": dict(case="diff1d", delta=4.5),
    "table5-blob": dict(case="blob", variant="weno5-loc"),
}


def default_out_root() -> Path:
    return Path(os.environ.get(OUT_ENV, "runs"))


class SolverFailure(RuntimeError):
    def __init__(self, message: str, dump: Path | None):
        super().__init__(message)
        self.dump = dump


# -- configuration -------------------------------------------------------------


def build_config(args: argparse.Namespace) -> CaseConfig:
    """Raw config document (if any) overlaid with command-line flags, then validated once."""
    doc = load_document(args.config) if args.config else {}
    if args.case:
        if "case" in doc and doc["case"] != args.case:
            raise ConfigurationError(f"--case {args.case} conflicts with case {doc['case']!r} in {args.config}")
        doc["case"] = args.case
    if args.paper_scale:
        if not str(doc.get("case", "")).startswith("buoyancy"):
            raise ConfigurationError("--paper-scale applies to the buoyancy case only")
        doc["case"] = "buoyancy"
        doc["preset"] = "paper"
    if "case" not in doc:
        raise ConfigurationError("case: give --case or a --config file")
    for flag, key in (("variant", "variant"), ("nx", "nx"), ("nz", "nz"), ("R", "refine"),
                      ("end_time", "end_time"), ("epsilon", "epsilon"), ("delta", "delta")):
        value = getattr(args, flag, None)
        if value is not None:
            doc[key] = value
    if args.seed is not None:
        doc["disturbance"] = {**(doc.get("disturbance") or {}), "seed": args.seed}
    if getattr(args, "sizes", None):
        doc["sizes"] = [int(v) for v in args.sizes.split(",")]
    if getattr(args, "profile", None):
        out = dict(doc.get("output") or {})
        out["profiles"] = list(dict.fromkeys(list(out.get("profiles", [])) + list(args.profile)))
        doc["output"] = out
    if args.no_snapshots:
        doc["output"] = {**(doc.get("output") or {}), "snapshots": False}
    return config_from_dict(doc)


def load_document(path) -> dict:
    """The JSON object in ``path``, checked by :func:`parse_config` first."""
    parse_config(path)
    return json.loads(Path(path).read_text())


def run_dir(args: argparse.Namespace, label: str) -> Path:
    out = Path(args.out) if args.out else default_out_root() / label
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- case execution ------------------------------------------------------------


def run_convergence(cfg: CaseConfig) -> ConvergenceReport:
    if cfg.case == "conv1d":
        from dualweno.cases.oned import case_1d_convection
        return case_1d_convection(cfg)
    if cfg.case == "diff1d":
        from dualweno.cases.oned import case_1d_diffusion
        return case_1d_diffusion(cfg)
    if cfg.case == "blob":
        from dualweno.cases.blob import case_2d_sheared_blob
        return case_2d_sheared_blob(cfg)
    raise ConfigurationError(f"case {cfg.case!r} has no convergence sweep")


def _write_report(report: ConvergenceReport, out: Path, stem: str, manifest: RunManifest) -> None:
    path = out / f"{stem}.csv"
    report.to_csv(path)
    manifest.add(path)
    print(report.to_text())


def run_single(cfg: CaseConfig, out: Path, manifest: RunManifest) -> dict:
    """One run of one case at one resolution; returns the summary."""
    n = cfg.nx or (cfg.sizes[0] if cfg.sizes else None)
    if cfg.case == "conv1d":
        from dualweno.cases.oned import run_convection
        mesh, values, err = run_convection(n, cfg.scheme(), cfg.delta or 0.0, cfg.end_time, dt=cfg.dt_fixed)
        exact = np.sin(np.pi * (mesh.centers - cfg.end_time))
        manifest.add(write_csv(out / "solution.csv", ["x", "phi", "exact"], zip(mesh.centers, values, exact)))
        return {"N": n, "L1_error": err}
    if cfg.case == "diff1d":
        from dualweno.cases.oned import erf_solution, run_diffusion
        mesh, values, err = run_diffusion(n, cfg.delta, cfg.scalar_diffusivity, duration=cfg.end_time,
                                          dt=cfg.dt_fixed)
        exact = erf_solution(mesh.centers, 10.0 + cfg.end_time, cfg.scalar_diffusivity)
        manifest.add(write_csv(out / "solution.csv", ["x", "phi", "exact"], zip(mesh.centers, values, exact)))
        return {"N": n, "L1_error": err}
    if cfg.case == "blob":
        from dualweno.cases.blob import run_blob
        from dualweno.cases.config import boundary_conditions
        if cfg.nz is not None and cfg.nz != n:
            raise ConfigurationError("blob: nx and nz must be equal")
        tr, err = run_blob(n, cfg.scheme(), cfg.end_time, cfg.cfl, bcs=boundary_conditions(cfg, "phi"))
        if cfg.output.snapshots:
            g = tr.grid
            manifest.add(write_vtk_rectilinear(out / "phi_final.vtk", g.mesh_x.centers, g.mesh_z.centers,
                                               {"phi": tr.interior("phi")}))
        return {"N": n, "L1_error": err}
    if cfg.case == "buoyancy":
        return run_buoyancy(cfg, out, manifest)
    raise ConfigurationError(f"unknown case {cfg.case!r}")


def _dump_state(run, out: Path) -> Path:
    path = out / "failure_state.npz"
    np.savez(path, time=run.time, u=run.flow.u, w=run.flow.w, p=run.flow.p,
             **{f"scalar_{k}": v for k, v in run.transport.fields.items()})
    return path


def run_buoyancy(cfg: CaseConfig, out: Path, manifest: RunManifest) -> dict:
    from dualweno.cases.buoyancy import NOT_REACHED, BuoyancyRun, save_disturbance

    run = BuoyancyRun(cfg)
    manifest.add(save_disturbance(run.disturbance, out / "disturbance.npy"))
    snap_dir = out / "snapshots"
    if cfg.output.snapshots:
        snap_dir.mkdir(exist_ok=True)

    def on_output(r):
        if not cfg.output.snapshots:
            return
        g = r.fine
        ub = r.transport.u[g.interior("xface")]
        wb = r.transport.w[g.interior("zface")]
        data = {"phi": r.transport.interior("phi"), "T": r.transport.interior("T"),
                "u": 0.5 * (ub[:-1] + ub[1:]), "w": 0.5 * (wb[:, :-1] + wb[:, 1:])}
        path = snap_dir / f"state_{int(round(r.time * 1000)):07d}.vtk"
        manifest.add(write_vtk_rectilinear(path, g.mesh_x.centers, g.mesh_z.centers, data,
                                           title=f"t={r.time:.6g}"))

    try:
        run.run(on_output=on_output)
    except (SimulationBlowUp, SolverStagnationError) as exc:
        dump = _dump_state(run, out)
        raise SolverFailure(f"{exc} at t={run.time:.6g}", dump) from exc
    rec = run.record
    series = rec.series()
    names = list(series)
    manifest.add(write_csv(out / "time_series.csv", names, zip(*(series[k] for k in names))))
    manifest.add(write_csv(out / "front.csv", ["time", "min_T_at_depth"], zip(rec.step_times, rec.front),
                           comments=[f"depth: {cfg.plume_depth}", f"threshold: {cfg.plume_threshold}"]))
    for spec in cfg.output.profiles:
        coords, _ = run.profile("phi", spec)
        header = ["coord"] + [f"t={t:g}" for t in rec.times]
        manifest.add(write_csv(out / f"profile_{spec.replace('=', '')}.csv", header,
                               zip(coords, *rec.profiles[spec]), comments=[f"phi along {spec}"]))
    run.flow.write_log(out / "flow_log.csv")
    manifest.add(out / "flow_log.csv")
    manifest.steps = run.steps
    arrival = run.arrival_time()
    return {"end_time": run.time, "steps": run.steps,
            "plume_arrival": None if arrival == NOT_REACHED else arrival,
            "total_phi": rec.total_phi[-1], "total_T": rec.total_t[-1],
            "phi_min": rec.phi_min, "phi_max": rec.phi_max}


def compare_variants(cfg: CaseConfig, variants: list[str], profiles: list[str], out: Path,
                     manifest: RunManifest) -> dict:
    summary = {}
    if cfg.case == "buoyancy":
        from dualweno.cases.buoyancy import BuoyancyRun
        finals: dict[str, dict[str, np.ndarray]] = {}
        coords = {}
        for v in variants:
            run = BuoyancyRun(cfg.with_updates(variant=v))
            run.run()
            finals[v] = {}
            for spec in profiles:
                coords[spec], finals[v][spec] = run.profile("phi", spec)
            summary[v] = {"phi_min": run.record.phi_min, "phi_max": run.record.phi_max,
                          "plume_arrival": run.arrival_time()}
        for spec in profiles:
            rows = zip(coords[spec], *(finals[v][spec] for v in variants))
            manifest.add(write_csv(out / f"compare_{spec.replace('=', '')}.csv", ["coord"] + variants, rows,
                                   comments=[f"phi along {spec} at t={cfg.end_time:g}"]))
        return summary
    rows = []
    for v in variants:
        report = run_convergence(cfg.with_updates(variant=v))
        for n, e, o in report.rows():
            rows.append((v, n, e, o))
        summary[v] = report.errors[-1]
    manifest.add(write_csv(out / "compare.csv", ["variant", "N", "L1_error", "order"], rows))
    return summary


# -- argument handling ---------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./runs)")
    p.add_argument("--case", help="conv1d, diff1d, blob, buoyancy, buoyancy-desk or buoyancy-paper")
    p.add_argument("--seed", type=int, help="disturbance seed")
    p.add_argument("--nx", type=int)
    p.add_argument("--nz", type=int)
    p.add_argument("--R", type=int, help="dual-mesh refinement factor")
    p.add_argument("--end-time", type=float, dest="end_time")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, help="stretching parameter")
    p.add_argument("--paper-scale", action="store_true", help="full-size buoyancy run (hours)")
    p.add_argument("--no-snapshots", action="store_true", dest="no_snapshots")
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualweno", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one case")
    _common(p)
    p.add_argument("--variant")
    p.add_argument("--profile", action="append", help="line profile such as z=4.5 (repeatable)")
    p.add_argument("--emit-config", action="store_true", help="print the resolved configuration and exit")

    p = sub.add_parser("converge", help="mesh-refinement sweep")
    _common(p)
    p.add_argument("--variant")
    p.add_argument("--sizes", help="comma-separated mesh sizes")

    p = sub.add_parser("compare", help="run several scheme variants on one case")
    _common(p)
    p.add_argument("--variants", required=True, help="comma-separated variant names")
    p.add_argument("--profile", action="append", help="line profile such as z=4.5 (repeatable)")
    p.add_argument("--sizes", help="comma-separated mesh sizes")

    p = sub.add_parser("tables", help="reproduce the convergence tables")
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV}/tables)")
    p.add_argument("--only", help="comma-separated subset of " + ",".join(TABLE_CASES))
    p.add_argument("--blob-max", type=int, default=320, help="largest blob mesh (640 takes about a minute)")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _execute(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    if args.command == "tables":
        names = args.only.split(",") if args.only else list(TABLE_CASES)
        unknown = [name for name in names if name not in TABLE_CASES]
        if unknown:
            raise ConfigurationError(f"--only: unknown table {unknown[0]!r}")
        out = run_dir(args, "tables")
        manifest = RunManifest({"tables": sorted(TABLE_CASES)}, str(out))
        for name in names:
            doc = dict(TABLE_CASES[name])
            if doc["case"] == "blob":
                doc["sizes"] = [n for n in (40, 80, 160, 320, 640) if n <= args.blob_max]
            print(f"== {name}")
            _write_report(run_convergence(config_from_dict(doc)), out, name, manifest)
        manifest.wall_seconds = time.perf_counter() - t0
        manifest.write()
        return EXIT_OK

    cfg = build_config(args)
    if getattr(args, "emit_config", False):
        print(emit_config(cfg))
        return EXIT_OK
    label = f"{args.command}-{cfg.case}" + (f"-{cfg.preset}" if cfg.preset else "")
    out = run_dir(args, label)
    emit_config(cfg, out / "config.json")
    manifest = RunManifest(cfg.to_dict(), str(out))
    manifest.add(out / "config.json")
    try:
        if args.command == "run":
            summary = run_single(cfg, out, manifest)
        elif args.command == "converge":
            report = run_convergence(cfg)
            _write_report(report, out, "convergence", manifest)
            summary = {"errors": report.errors, "orders": [None if np.isnan(o) else o for o in report.orders]}
        else:
            variants = [v.strip() for v in args.variants.split(",") if v.strip()]
            for v in variants:
                cfg.with_updates(variant=v).scheme()
            profiles = list(args.profile or []) or list(cfg.output.profiles) or ["z=4.5"]
            summary = compare_variants(cfg, variants, profiles, out, manifest)
    except SolverFailure as exc:
        manifest.summary = {"error": str(exc), "dump": str(exc.dump)}
        manifest.write()
        raise
    manifest.summary = summary
    manifest.wall_seconds = time.perf_counter() - t0
    manifest.write()
    for key, value in summary.items():
        print(f"{key}: {value}")
    print(f"artifacts in {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _execute(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}; state dumped to {exc.dump}", file=sys.stderr)
        return EXIT_SOLVER
    except (SimulationBlowUp, SolverStagnationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
