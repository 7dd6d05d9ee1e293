"""Experiment runners: build data from a config, run, write artifacts and a manifest.

Every artifact is a pure function of the configuration (including its
seed): no timestamps, host names or timings are written, floats in CSV
files use 17 significant digits and JSON keys are sorted. The manifest
lists each file with its SHA-256 hash and is re-checked against the files
after writing.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from . import bourgain, duhamel, imethod
from .checkpoint import CheckpointError, encode_checkpoint, read_checkpoint
from .config import ConfigError, ExperimentConfig, config_to_dict
from .evolve import DIAGNOSTIC_COLUMNS, BlowUpError, EvolveConfig, run
from .model import FieldPair, region_sample, stationary_wave
from .spectral import ComplexField, SpectralGrid, make_grid

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_BLOWUP = 3


# -- serialization helpers ---------------------------------------------------------

def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def csv_bytes(header: List[str], rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format_value(v) for v in r])
    return buf.getvalue().encode("utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def json_bytes(obj) -> bytes:
    return (json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


class ArtifactWriter:
    """Writes each artifact once and remembers its hash for the manifest."""

    def __init__(self, out_dir):
        self.out_dir = str(out_dir)
        os.makedirs(self.out_dir, exist_ok=True)
        self.files: List[Dict[str, Any]] = []

    def write(self, name: str, data: bytes) -> str:
        if any(f["path"] == name for f in self.files):
            raise RuntimeError(f"artifact {name} written twice")
        path = os.path.join(self.out_dir, name)
        with open(path, "wb") as fh:
            fh.write(data)
        self.files.append({"path": name, "bytes": len(data),
                           "sha256": hashlib.sha256(data).hexdigest()})
        return path

    def csv(self, name, header, rows):
        return self.write(name, csv_bytes(header, rows))

    def json(self, name, obj):
        return self.write(name, json_bytes(obj))

    def audit(self) -> List[str]:
        """Names of files whose content no longer matches the recorded hash."""
        return [f["path"] for f in self.files
                if sha256_file(os.path.join(self.out_dir, f["path"])) != f["sha256"]]


# -- initial data ------------------------------------------------------------------

def _lattice_check(grid: SpectralGrid, k: float, key: str):
    j = k / grid.dxi
    if abs(j - round(j)) > 1e-9:
        raise ConfigError(key, f"{k} is not a lattice frequency (multiples of {grid.dxi:.17g})")


def build_grid(cfg: ExperimentConfig) -> SpectralGrid:
    return make_grid(cfg.grid.L, cfg.grid.n)


def build_initial_state(cfg: ExperimentConfig, grid: Optional[SpectralGrid] = None) -> FieldPair:
    grid = grid or build_grid(cfg)
    ic = cfg.initial_condition
    x = grid.x
    if ic.type == "gaussian":
        A = ic.get("amplitude")
        Av = ic.get("v_amplitude")
        Av = A if Av is None else Av
        k = ic.get("phase_velocity") / 2.0
        g = np.exp(-((x - ic.get("center")) / ic.get("width")) ** 2)
        return FieldPair(ComplexField(grid, A * g * np.exp(1j * k * x)),
                         ComplexField(grid, Av * g * np.exp(2j * k * x)))
    if ic.type == "plane_wave":
        k = ic.get("wavenumber")
        _lattice_check(grid, k, "initial_condition.wavenumber")
        A = ic.get("amplitude")
        Av = ic.get("v_amplitude")
        Av = A if Av is None else Av
        return FieldPair(ComplexField(grid, A * np.exp(1j * k * x)),
                         ComplexField(grid, Av * np.exp(2j * k * x)))
    if ic.type == "exact_stationary":
        try:
            return stationary_wave(grid, cfg.model, ic.get("k"))
        except ValueError as exc:
            raise ConfigError("initial_condition.k", str(exc)) from None
    if ic.type == "from_checkpoint":
        try:
            return read_checkpoint(ic.get("path"), expected_grid=grid)
        except (OSError, CheckpointError) as exc:
            raise ConfigError("initial_condition.path", str(exc)) from None
    raise ConfigError("initial_condition.type", f"unsupported type {ic.type!r}")


# -- experiments ---------------------------------------------------------------------

@dataclass
class ExperimentResult:
    exit_code: int
    status: str
    out_dir: str
    files: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None


class _BlowUp(Exception):
    """Internal signal: artifacts were written but the run blew up."""


def _simulate(cfg, w: ArtifactWriter):
    state0 = build_initial_state(cfg)
    traj = run(state0, cfg.model, cfg.evolve)
    w.csv("diagnostics.csv", list(DIAGNOSTIC_COLUMNS), traj.diagnostic_rows())
    d = traj.diagnostics
    summary = {"t_final": float(traj.times[-1]), "records": len(traj),
               "blown_up": traj.blown_up, "blowup_time": traj.blowup_time}
    if not traj.blown_up:
        summary["mass_drift"] = float(np.max(np.abs(d["mass"] - d["mass"][0])))
        summary["hamiltonian_drift"] = float(np.max(np.abs(d["hamiltonian"] - d["hamiltonian"][0])))
        w.write("final_state.qnck", encode_checkpoint(traj.final, traj.times[-1], cfg.model))
    w.json("summary.json", summary)
    if traj.blown_up:
        raise _BlowUp(f"blow-up detected at t={traj.blowup_time}")
    return summary


def _wave_check(cfg, w):
    if cfg.initial_condition.type != "exact_stationary":
        raise ConfigError("initial_condition.type", "wave_check needs an exact_stationary initial condition")
    state0 = build_initial_state(cfg)
    traj = run(state0, cfg.model, cfg.evolve)
    if traj.blown_up:
        w.json("wave_check.json", {"blown_up": True, "blowup_time": traj.blowup_time})
        raise _BlowUp(f"blow-up detected at t={traj.blowup_time}")
    final = traj.final
    du = np.sum(np.abs(final.u.samples - state0.u.samples) ** 2)
    dv = np.sum(np.abs(final.v.samples - state0.v.samples) ** 2)
    ref = np.sum(np.abs(state0.u.samples) ** 2) + np.sum(np.abs(state0.v.samples) ** 2)
    summary = {"relative_l2_error": float(np.sqrt((du + dv) / ref)), "t_end": float(traj.times[-1]),
               "dt": cfg.evolve.t_end / cfg.evolve.num_steps, "scheme": cfg.evolve.scheme,
               "k": cfg.initial_condition.get("k")}
    w.json("wave_check.json", summary)
    return summary


def _picard(cfg, w):
    state0 = build_initial_state(cfg)
    T = cfg.param("T")
    t_scale = duhamel.contraction_time_scale(state0, cfg.model)
    if T is None:
        T = t_scale
    mesh = cfg.param("mesh_intervals")
    sol, rep = duhamel.picard_solve(state0, cfg.model, T, cfg.param("tolerance"),
                                    cfg.param("max_iter"), mesh, cfg.param("seed_iterate"))
    w.csv("picard_distances.csv", ["iteration", "distance"],
          [[i + 1, d] for i, d in enumerate(rep.successive_distances)])
    summary = json.loads(rep.to_json())
    summary["contraction_time_scale"] = t_scale
    if cfg.param("compare_with_stepper"):
        h = sol.times[1] - sol.times[0]
        sub = 8
        ecfg = EvolveConfig(dt=h / sub, t_end=T, scheme="ifrk4", record_every=sub)
        traj = run(state0, cfg.model, ecfg)
        k = len(traj.times)
        ref = duhamel.TimeSampledPair(sol.grid, traj.times, traj.u_raw, traj.v_raw)
        part = duhamel.TimeSampledPair(sol.grid, sol.times[:k], sol.u_raw[:k], sol.v_raw[:k])
        summary["stepper_sup_l2_difference"] = part.sup_distance(ref)
    w.json("picard_report.json", summary)
    return summary


def _imethod(cfg, w):
    state0 = build_initial_state(cfg)
    rep = imethod.increment_experiment(state0, cfg.model.sigma, cfg.param("s"), cfg.param("N_values"),
                                       params=cfg.model, dt=cfg.evolve.dt, scheme=cfg.evolve.scheme,
                                       delta_prefactor=cfg.param("delta_prefactor"))
    w.csv("increments.csv", ["N", "delta", "increment"], rep.rows())
    summary = json.loads(json.dumps(_jsonable(rep.__dict__)))
    w.json("increments.json", summary)
    if rep.blown_up:
        raise _BlowUp(f"blow-up at N values {rep.blown_up}")
    return summary


def _probe(cfg, w):
    res = bourgain.probe(cfg.model.sigma, cfg.param("kappa"), cfg.param("s"), cfg.param("b"),
                         cfg.param("d"), cfg.param("ensemble_size"), cfg.param("resolutions"),
                         seed=cfg.seed)
    w.csv("probe.csv", ["resolution", "ratio_max", "ratio_median", "estimate"], res.rows())
    summary = json.loads(res.to_json())
    w.json("probe.json", summary)
    return summary


def _region(cfg, w):
    rows = region_sample(cfg.model.sigma, cfg.param("kappa_range"), cfg.param("s_range"),
                         cfg.param("resolution"))
    w.csv("region.csv", ["kappa", "s", "in_region"], rows)
    return {"points": len(rows), "inside": int(sum(r[2] for r in rows))}


def _existence(cfg, w):
    base = build_initial_state(cfg)
    res = duhamel.existence_time_scaling(
        cfg.param("amplitudes"), cfg.model, base, threshold=cfg.param("threshold"),
        T_start=cfg.param("T_start"), T_cap=cfg.param("T_cap"), rel_tol=cfg.param("rel_tol"),
        mesh_intervals=cfg.param("mesh_intervals"))
    w.csv("existence_scaling.csv", ["amplitude", "norm", "T_max", "contraction_factor"], res.rows())
    summary = {"slope": res.slope, "failures": res.failures, "amplitudes": res.amplitudes,
               "T_max": res.T_max}
    w.json("existence_scaling.json", summary)
    return summary


RUNNERS = {"simulate": _simulate, "wave_check": _wave_check, "picard": _picard,
           "imethod": _imethod, "probe_bilinear": _probe, "region": _region,
           "existence_scaling": _existence}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run ``cfg`` and write its artifacts plus ``manifest.json`` into ``cfg.output_dir``.

    Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 blow-up.
    A manifest is written in every case; its ``status`` is ``complete``,
    ``partial`` (blow-up after some output) or ``failed``.
    """
    w = ArtifactWriter(cfg.output_dir)
    summary: Dict[str, Any] = {}
    error = None
    try:
        summary = RUNNERS[cfg.experiment](cfg, w)
        code, status = EXIT_OK, "complete"
    except _BlowUp as exc:
        code, status, error = EXIT_BLOWUP, "partial", str(exc)
    except BlowUpError as exc:
        code, status, error = EXIT_BLOWUP, "partial", str(exc)
    except ConfigError as exc:
        code, status, error = EXIT_VALIDATION, "failed", str(exc)
    except Exception as exc:  # noqa: BLE001 - any runtime failure maps to exit code 2
        code, status, error = EXIT_RUNTIME, "failed", f"{type(exc).__name__}: {exc}"
    if code != EXIT_OK and w.files:
        status = "partial"
    doc = config_to_dict(cfg)
    doc.pop("output_dir")
    manifest = {"experiment": cfg.experiment, "status": status, "exit_code": code,
                "error": error, "seed": cfg.seed, "config": doc, "files": list(w.files)}
    files = list(w.files)
    with open(os.path.join(w.out_dir, "manifest.json"), "wb") as fh:
        fh.write(json_bytes(manifest))
    bad = w.audit()
    if bad:
        return ExperimentResult(EXIT_RUNTIME, "failed", w.out_dir, files, summary,
                                f"manifest hash mismatch for {bad}")
    return ExperimentResult(code, status, w.out_dir, files, summary, error)


def verify_manifest(out_dir) -> List[str]:
    """Files listed in ``out_dir/manifest.json`` whose hash does not match."""
    with open(os.path.join(out_dir, "manifest.json"), "r", encoding="utf-8") as fh:
        man = json.load(fh)
    return [f["path"] for f in man["files"]
            if sha256_file(os.path.join(out_dir, f["path"])) != f["sha256"]]
