from __future__ import annotations

import json

import numpy as np
import pytest

from ensemblehydro import AxiomReport, Constants, GridSpec
from ensemblehydro.diagnostics import ComparisonRecord, ObservableRecord
from ensemblehydro.grids import ConfigurationError
from ensemblehydro.io import (load_sampled_field, observables_header,
                              snapshot_filename, write_axiom_reports,
                              write_comparison_csv, write_observables_csv,
                              write_snapshot, write_snapshot_meta)

from conftest import gaussian_state


def records_1d():
    return [
        ObservableRecord(time=0.0, norm=1.0, energy=0.125, mean=(0.0,),
                         variance=(1.0,), max_q=4.5),
        ObservableRecord(time=0.1, norm=1.0 - 1e-15, energy=0.125 + 1e-13,
                         mean=(1e-17,), variance=(1.0049,), max_q=4.4),
    ]


def test_observables_header_interleaves_axes():
    assert observables_header(1) == "time,norm,energy,mean_0,var_0,maxQ"
    assert observables_header(2) == "time,norm,energy,mean_0,var_0,mean_1,var_1,maxQ"


def test_observables_csv_round_trips_exactly(tmp_path):
    path = tmp_path / "obs.csv"
    write_observables_csv(path, records_1d())
    text = path.read_text()
    assert text.startswith("time,norm,energy,mean_0,var_0,maxQ\n")
    data = np.genfromtxt(path, delimiter=",", names=True)
    # repr round-trips doubles bit for bit
    assert data["norm"][1] == 1.0 - 1e-15
    assert data["energy"][1] == 0.125 + 1e-13
    assert data["var_0"][1] == 1.0049


def test_observables_csv_rejects_empty(tmp_path):
    with pytest.raises(ConfigurationError):
        write_observables_csv(tmp_path / "obs.csv", [])


def test_comparison_csv(tmp_path):
    path = tmp_path / "cmp.csv"
    write_comparison_csv(path, [ComparisonRecord(time=0.5, l2_density=1e-10,
                                                 sup_density=2e-10, fidelity=1.0 - 1e-12)])
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "time,l2_density,sup_density,fidelity"
    assert lines[1].split(",")[3] == repr(1.0 - 1e-12)


def test_snapshot_filenames():
    assert snapshot_filename(0, "csv") == "snap_000000.csv"
    assert snapshot_filename(42, "bin") == "snap_000042.npy"


def test_snapshot_csv_carries_time_and_slope(tmp_path, grid64):
    st = gaussian_state(grid64).with_fields(time=1.25, slope=(0.5,))
    path = tmp_path / "snap.csv"
    write_snapshot(path, st, "csv")
    lines = path.read_text().split("\n")
    assert lines[0] == f"# time = {1.25!r}"
    assert lines[1] == f"# slope = {0.5!r}"
    assert lines[2] == "x_0,p,s"
    data = np.loadtxt(path, delimiter=",", skiprows=3)
    assert data.shape == (64, 3)
    assert np.array_equal(data[:, 1], st.p)
    assert data[0, 0] == -10.0


def test_snapshot_bin_round_trips(tmp_path, grid64):
    st = gaussian_state(grid64)
    path = tmp_path / "snap.npy"
    write_snapshot(path, st, "bin")
    arr = np.load(path)
    assert arr.shape == (2, 64)
    assert np.array_equal(arr[0], st.p)
    assert np.array_equal(arr[1], st.s)
    with pytest.raises(ConfigurationError):
        write_snapshot(tmp_path / "x.dat", st, "hdf5")


def test_snapshot_meta(tmp_path):
    path = tmp_path / "meta.csv"
    write_snapshot_meta(path, [0.0, 0.5], ["a.csv", "b.csv"], (0.25,))
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "index,filename,time,slope_0"
    assert lines[1] == "0,a.csv,0.0,0.25"
    assert lines[2] == "1,b.csv,0.5,0.25"


def test_load_sampled_field(tmp_path):
    values = np.linspace(0.0, 2.0, 32)
    np.save(tmp_path / "v.npy", values)
    assert np.array_equal(load_sampled_field(tmp_path / "v.npy"), values)
    np.save(tmp_path / "bad.npy", np.array(["a", "b"]))
    with pytest.raises(ConfigurationError):
        load_sampled_field(tmp_path / "bad.npy")


def test_axiom_reports(tmp_path):
    reports = [
        AxiomReport(name="scale-invariance", deviation=1e-15, tolerance=1e-12,
                    passed=True, details="3 lambdas"),
        AxiomReport(name="boost", deviation=0.5, tolerance=1e-4,
                    passed=False, details="control"),
    ]
    write_axiom_reports(tmp_path / "ax.json", tmp_path / "ax.txt", reports)
    loaded = json.loads((tmp_path / "ax.json").read_text())
    assert loaded[0]["name"] == "scale-invariance"
    assert loaded[0]["deviation"] == 1e-15
    assert loaded[1]["passed"] is False
    table = (tmp_path / "ax.txt").read_text()
    assert "pass" in table and "FAIL" in table


def test_writers_are_deterministic(tmp_path, grid64):
    st = gaussian_state(grid64)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_snapshot(a, st, "csv")
    write_snapshot(b, st, "csv")
    assert a.read_bytes() == b.read_bytes()
    write_observables_csv(tmp_path / "o1.csv", records_1d())
    write_observables_csv(tmp_path / "o2.csv", records_1d())
    assert (tmp_path / "o1.csv").read_bytes() == (tmp_path / "o2.csv").read_bytes()
