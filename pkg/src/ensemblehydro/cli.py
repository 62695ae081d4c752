"""Command line front end.

Verbs:
  simulate        integrate a configured scenario, write observables, snapshots,
                  and figures, and gate on the conservation tolerances
  compare         run the same scenario through both the hydrodynamic form and
                  the independent linear reference solver and gate on agreement
  verify-axioms   run the structural property suite and write its report
  list-scenarios  print the built-in preset names

Exit codes: 0 success, 1 a tolerance gate failed, 2 configuration problem,
3 the integration blew up.  Outputs carry no timestamps, so a rerun with the
same configuration and seed is bit-identical.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, effective_config, parse_config
from .diagnostics import compare_with_reference
from .evolution import BlowUpError, Trajectory, evolve_hydro, evolve_reference
from .fields import InvalidDensityError, NodeError, to_wavefunction
from .grids import ConfigurationError
from .hamiltonian import NumericsPolicy
from .scenarios import preset_names
from . import axioms, figures, io

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3

NORM_TOL = 1e-8
ENERGY_TOL = 1e-6
FIDELITY_TOL = 1e-5
DENSITY_TOL = 1e-4


def _read_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _write_common(out: Path, cfg: RunConfig, mode: str, seed: int, fmt: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    extra = {"cli.mode": mode, "cli.seed": str(seed), "cli.format": fmt}
    (out / "effective-config.txt").write_text(effective_config(cfg, extra=extra))


def _write_trajectory(out: Path, traj: Trajectory, fmt: str) -> None:
    io.write_observables_csv(out / "observables.csv", traj.observables)
    snapdir = out / "snapshots"
    snapdir.mkdir(exist_ok=True)
    names = []
    for i, state in enumerate(traj.snapshots):
        name = io.snapshot_filename(i, fmt)
        io.write_snapshot(snapdir / name, state, fmt)
        names.append(name)
    io.write_snapshot_meta(snapdir / "meta.csv", traj.times, names,
                           traj.snapshots[0].slope)
    figdir = out / "figures"
    figdir.mkdir(exist_ok=True)
    figures.density_figure(traj, figdir / "density.png")
    figures.observable_figure(traj.observables, figdir / "observables.png")
    if traj.flags:
        (out / "flags.txt").write_text("\n".join(traj.flags) + "\n")
        for flag in traj.flags:
            print(f"warning: {flag}", file=sys.stderr)


def _gate(label: str, value: float, tol: float) -> bool:
    ok = value <= tol
    word = "pass" if ok else "FAIL"
    print(f"{label}: {word} ({value:.3e}, tolerance {tol:.1e})")
    return ok


def _conservation_gates(traj: Trajectory) -> bool:
    norms = [r.norm for r in traj.observables]
    energies = [r.energy for r in traj.observables]
    norm_drift = max(abs(n - 1.0) for n in norms)
    # Relative drift against the initial energy; the absolute reading takes
    # over when the run starts at (numerically) zero energy.
    scale = max(abs(energies[0]), 1.0e-12)
    energy_drift = max(abs(e - energies[0]) for e in energies) / scale
    ok = _gate("norm conservation", norm_drift, NORM_TOL)
    return _gate("energy conservation", energy_drift, ENERGY_TOL) and ok


def run_simulate(cfg: RunConfig, out: Path, seed: int, fmt: str) -> int:
    model = cfg.scenario.model(cfg.numerics)
    traj = evolve_hydro(cfg.scenario.initial, model, cfg.run)
    _write_common(out, cfg, "simulate", seed, fmt)
    _write_trajectory(out, traj, fmt)
    final = traj.snapshots[-1]
    print(f"integrated {cfg.scenario.name!r} to t = {final.time!r} "
          f"({len(traj.observables)} records)")
    return EXIT_OK if _conservation_gates(traj) else EXIT_TOLERANCE


def run_compare(cfg: RunConfig, out: Path, seed: int, fmt: str) -> int:
    model = cfg.scenario.model(cfg.numerics)
    constants = model.constants
    traj = evolve_hydro(cfg.scenario.initial, model, cfg.run)
    ref = evolve_reference(to_wavefunction(cfg.scenario.initial, constants), model, cfg.run)
    records = [compare_with_reference(state, wf, constants)
               for state, wf in zip(traj.snapshots, ref.snapshots)]
    _write_common(out, cfg, "compare", seed, fmt)
    _write_trajectory(out, traj, fmt)
    io.write_comparison_csv(out / "comparison.csv", records)
    figures.comparison_figure(records, out / "figures" / "comparison.png")
    print(f"compared {cfg.scenario.name!r} against the reference solver "
          f"({len(records)} snapshots)")
    worst_fid = min(r.fidelity for r in records)
    worst_l2 = max(r.l2_density for r in records)
    ok = _gate("fidelity gap", 1.0 - worst_fid, FIDELITY_TOL)
    ok = _gate("density L2 gap", worst_l2, DENSITY_TOL) and ok
    return EXIT_OK if ok else EXIT_TOLERANCE


def run_verify_axioms(cfg: RunConfig | None, out: Path, seed: int) -> int:
    numerics = cfg.numerics if cfg is not None else NumericsPolicy()
    reports = axioms.run_axiom_suite(seed=seed, numerics=numerics)
    out.mkdir(parents=True, exist_ok=True)
    io.write_axiom_reports(out / "axioms.json", out / "axioms.txt", reports)
    print((out / "axioms.txt").read_text(), end="")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemblehydro",
        description="ensemble Hamiltonian field dynamics on periodic grids",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="flat key = value configuration file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("csv", "bin"), default="csv",
                       help="snapshot format (observables stay csv)")

    add_common(sub.add_parser("simulate", help="integrate and report"))
    add_common(sub.add_parser("compare", help="cross-check against the reference solver"))
    add_common(sub.add_parser("verify-axioms", help="run the structural property suite"),
               config_required=False)
    sub.add_parser("list-scenarios", help="print the preset scenario names")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.mode == "list-scenarios":
        for name in preset_names():
            print(name)
        return EXIT_OK
    try:
        cfg = _read_config(args.config) if args.config else None
        out = Path(args.out)
        if args.mode == "simulate":
            assert cfg is not None
            return run_simulate(cfg, out, args.seed, args.format)
        if args.mode == "compare":
            assert cfg is not None
            return run_compare(cfg, out, args.seed, args.format)
        return run_verify_axioms(cfg, out, args.seed)
    except (ConfigurationError, InvalidDensityError, NodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    raise SystemExit(main())
