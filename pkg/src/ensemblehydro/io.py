"""Writers for the delimited outputs and binary field snapshots.

All text output is formatted with repr, which round-trips doubles exactly and
is platform-stable, so identical runs produce bit-identical files (the CLI
determinism contract).  Nothing here writes a timestamp.
"""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .axioms import AxiomReport
from .diagnostics import ComparisonRecord, ObservableRecord
from .fields import FieldState
from .grids import ConfigurationError


def _fmt(v) -> str:
    # plain-float repr round-trips exactly; numpy scalars repr as np.float64(...)
    return repr(float(v))


def observables_header(ndim: int) -> str:
    cols = ["time", "norm", "energy"]
    for k in range(ndim):
        cols += [f"mean_{k}", f"var_{k}"]
    cols.append("maxQ")
    return ",".join(cols)


def write_observables_csv(path: str | Path, records: list[ObservableRecord]) -> None:
    if not records:
        raise ConfigurationError("no observable records to write")
    ndim = len(records[0].mean)
    lines = [observables_header(ndim)]
    for r in records:
        row = [_fmt(r.time), _fmt(r.norm), _fmt(r.energy)]
        for k in range(ndim):
            row += [_fmt(r.mean[k]), _fmt(r.variance[k])]
        row.append(_fmt(r.max_q))
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_comparison_csv(path: str | Path, records: list[ComparisonRecord]) -> None:
    lines = ["time,l2_density,sup_density,fidelity"]
    for r in records:
        lines.append(",".join(map(_fmt, (r.time, r.l2_density, r.sup_density, r.fidelity))))
    Path(path).write_text("\n".join(lines) + "\n")


def snapshot_filename(index: int, fmt: str) -> str:
    ext = {"csv": "csv", "bin": "npy"}[fmt]
    return f"snap_{index:06d}.{ext}"


def write_snapshot(path: str | Path, state: FieldState, fmt: str) -> None:
    """One snapshot: fmt "csv" is columns of coordinates, p, S; fmt "bin" is
    an .npy stack of shape (2, *grid), channel 0 = p, channel 1 = S."""
    if fmt == "bin":
        np.save(Path(path), np.stack([state.p, state.s]))
        return
    if fmt != "csv":
        raise ConfigurationError(f"unknown snapshot format {fmt!r}")
    grid = state.grid
    cols = [grid.mesh[ax].ravel() for ax in range(grid.ndim)]
    cols += [state.p.ravel(), state.s.ravel()]
    header = ",".join([f"x_{k}" for k in range(grid.ndim)] + ["p", "s"])
    lines = [f"# time = {_fmt(state.time)}",
             f"# slope = {','.join(map(_fmt, state.slope))}",
             header]
    for row in zip(*cols):
        lines.append(",".join(map(_fmt, row)))
    Path(path).write_text("\n".join(lines) + "\n")


def write_snapshot_meta(path: str | Path, times: list[float], names: list[str],
                        slope: tuple[float, ...]) -> None:
    lines = ["index,filename,time," + ",".join(f"slope_{k}" for k in range(len(slope)))]
    tail = "," + ",".join(map(_fmt, slope))
    for i, (t, name) in enumerate(zip(times, names)):
        lines.append(f"{i},{name},{_fmt(t)}{tail}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_sampled_field(path: str | Path) -> np.ndarray:
    """A grid-shaped array from an .npy file, e.g. a potential sampled offline.

    A saved snapshot stacks (p, S); channel 0 of such a file is the density.
    """
    arr = np.load(Path(path))
    if not np.issubdtype(arr.dtype, np.floating):
        raise ConfigurationError(f"{path}: expected a float array, got {arr.dtype}")
    return arr


def write_axiom_reports(json_path: str | Path, table_path: str | Path,
                        reports: list[AxiomReport]) -> None:
    Path(json_path).write_text(
        json.dumps([asdict(r) for r in reports], indent=2, sort_keys=True) + "\n"
    )
    name_w = max(len(r.name) for r in reports)
    lines = [f"{'check'.ljust(name_w)}  result  deviation      tolerance"]
    for r in reports:
        word = "pass" if r.passed else "FAIL"
        lines.append(f"{r.name.ljust(name_w)}  {word}    {r.deviation:<13.6g}  {r.tolerance:.6g}")
    Path(table_path).write_text("\n".join(lines) + "\n")
