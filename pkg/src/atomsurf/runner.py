"""Scenario execution: sweep orchestration, worker pool and CSV output.

Sweep points are distributed over a process pool and reassembled in
sweep order, so a run is deterministic for a fixed config: two runs
produce byte-identical CSV bodies (only the timestamp header line
differs).  Quadrature failures never abort a sweep; the affected rows
are flushed with a reason in the ``status`` column and the run is
reported as partially failed.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .constants import wavelength_nm
from .couplings import (chain_array, coupling_matrices, orientation_vector,
                        surface_shift)
from .dynamics import (WindowTooShortError, build_effective_hamiltonian,
                       propagate, transport_metrics)
from .greens import ONE_SURFACE, TWO_SURFACES, VACUUM, LayerStack, scattering_green
from .materials import epsilon, plasma_energy_ev
from .scenario import Scenario
from .sommerfeld import ConvergenceError

_CHUNK = 8          # omega points handled per worker job


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple]
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def n_failed(self) -> int:
        k = self.columns.index("status")
        return sum(1 for r in self.rows if r[k] != "ok")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(table: ResultTable, path) -> None:
    lines = [f"# {k} = {v}" for k, v in table.metadata.items()]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(table: ResultTable, path) -> None:
    def clean(v):
        if isinstance(v, (float, np.floating)) and not math.isfinite(v):
            return None
        if isinstance(v, (np.integer, np.floating)):
            return v.item()
        return v

    doc = {"metadata": table.metadata, "columns": table.columns,
           "rows": [[clean(v) for v in row] for row in table.rows]}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def _stack(scn: Scenario) -> LayerStack:
    mats = [scn.materials[n] for n in scn.material_names]
    if scn.geometry == VACUUM:
        return LayerStack()
    if scn.geometry == ONE_SURFACE:
        return LayerStack(kind=ONE_SURFACE, lower=mats[0])
    return LayerStack(kind=TWO_SURFACES, lower=mats[0], upper=mats[1],
                      height_nm=scn.h_nm)


def _omega_scale(scn: Scenario) -> tuple[str, float]:
    """Scale for the omega_scaled column: omega_p of the first metal, else 1."""
    for name in scn.material_names:
        wp = plasma_energy_ev(scn.materials[name])
        if wp:
            return f"omega_p({name}) = {wp} eV", wp
    return "eV (unscaled)", 1.0


# ---------------------------------------------------------------------------
# per-task row generation (module level so the pool can pickle them)


def _rows_epsilon(args):
    scn, name, omegas = args
    mat = scn.materials[name]
    wp = plasma_energy_ev(mat) or 1.0
    rows = []
    for w in omegas:
        eps = epsilon(mat, w)
        rows.append((name, w, w / wp, eps.real, eps.imag, "ok"))
    return rows, {}


def _failed_row(prefix, n_numeric, exc):
    reason = f"failed: {type(exc).__name__}: {exc}"
    return tuple(prefix) + (float("nan"),) * n_numeric + (reason.replace(",", ";"),)


def _rows_single_rate(args):
    scn, orientation, z, omegas = args
    stack = _stack(scn)
    _, wp = _omega_scale(scn)
    dhat = orientation_vector(orientation)
    rows = []
    for w in omegas:
        lam = wavelength_nm(w)
        try:
            gr = scattering_green(stack, [0.0, 0.0, z], [0.0, 0.0, z], w,
                                  scn.quadrature)
            rate = 1.0 + 3.0 * lam * float(np.imag(dhat @ gr @ dhat))
            rows.append((scn.material_names[0], orientation, z, w, w / wp,
                         rate, "ok"))
        except ConvergenceError as exc:
            rows.append(_failed_row((scn.material_names[0], orientation, z,
                                     w, w / wp), 1, exc))
    return rows, {}


_PAIR_COLUMNS = ["orientation", "z_nm", "a_nm", "omega_ev", "omega_scaled",
                 "v0_over_gamma0", "v_over_gamma0", "v_minus_v0_over_gamma0",
                 "gamma_diag_over_gamma0", "gamma0_offdiag_over_gamma0",
                 "gamma_offdiag_over_gamma0", "v_over_gamma_diag",
                 "gamma_offdiag_over_gamma_diag", "status"]


def _pair_observables(scn, stack, orientation, z, a, w):
    arr = chain_array(2, a, z, orientation, w)
    vacuum = coupling_matrices(arr, LayerStack())
    cs = vacuum if stack.kind == VACUUM else \
        coupling_matrices(arr, stack, scn.quadrature)
    v0, g0 = vacuum.v[0, 1], vacuum.gamma[0, 1]
    v, g12, gd = cs.v[0, 1], cs.gamma[0, 1], cs.gamma[0, 0]
    return (v0, v, v - v0, gd, g0, g12, v / gd, g12 / gd)


def _rows_pair_scan(args):
    scn, orientation, z, a_values, w = args
    stack = _stack(scn)
    _, wp = _omega_scale(scn)
    rows = []
    for a in a_values:
        try:
            obs = _pair_observables(scn, stack, orientation, z, a, w)
            rows.append((orientation, z, a, w, w / wp) + obs + ("ok",))
        except ConvergenceError as exc:
            rows.append(_failed_row((orientation, z, a, w, w / wp), 8, exc))
    return rows, {}


def _rows_shift(args):
    scn, name, orientation, geometry, z = args
    mat = scn.materials[name]
    dhat = orientation_vector(orientation)
    if geometry == ONE_SURFACE:
        stack = LayerStack(kind=ONE_SURFACE, lower=mat)
        h = float("nan")
    else:
        h = scn.h_nm if scn.h_nm else 2.0 * z   # equidistant gap by default
        stack = LayerStack(kind=TWO_SURFACES, lower=mat, upper=mat, height_nm=h)
    try:
        res = surface_shift(stack, [0.0, 0.0, z], dhat, scn.omega_a_ev,
                            scn.gamma_ev, scn.quadrature)
        rows = [(name, orientation, geometry, z, h, scn.omega_a_ev,
                 res.delta_ev, res.delta_ev / scn.omega_a_ev,
                 res.omega_shifted_ev, res.iterations,
                 "true" if res.converged else "false", "ok")]
    except ConvergenceError as exc:
        rows = [_failed_row((name, orientation, geometry, z, h,
                             scn.omega_a_ev), 4, exc)[:-1]
                + ("nan", f"failed: {exc}".replace(",", ";"))]
    return rows, {}


def _transport_setup(scn):
    stack = _stack(scn)
    z = scn.z_nm[0] if scn.z_nm else 0.0
    arr = chain_array(scn.n_atoms, scn.a_nm, z, scn.orientations[0],
                      scn.omega_a_ev)
    return stack, arr


def _rows_modes(args):
    (scn,) = args
    stack, arr = _transport_setup(scn)
    cs = coupling_matrices(arr, stack, scn.quadrature)
    rows = [(scn.orientations[0], m + 1, cs.mode_rates[m], "ok")
            for m in range(arr.n)]
    meta = {"gamma-diag-over-gamma0": _fmt(cs.gamma[0, 0])}
    return rows, meta


def _rows_transport(args):
    (scn,) = args
    stack, arr = _transport_setup(scn)
    cs = coupling_matrices(arr, stack, scn.quadrature)
    k = build_effective_hamiltonian(cs)
    c0 = np.zeros(arr.n, dtype=complex)
    c0[0] = 1.0
    traj = propagate(k, c0, scn.t_max_gamma, scn.dt_out_gamma)
    pops = traj.populations
    total = traj.total
    rows = [(t,) + tuple(pops[i]) + (total[i], "ok")
            for i, t in enumerate(traj.times)]
    meta = {"gamma-diag-over-gamma0": _fmt(cs.gamma[0, 0]),
            "min-mode-rate-over-gamma0": _fmt(float(cs.mode_rates.min()))}
    try:
        m = transport_metrics(traj)
        meta.update({"gamma-t-peak": _fmt(m.t_peak),
                     "peak-population": _fmt(m.peak_population),
                     "remaining-fraction": _fmt(m.remaining_fraction)})
    except WindowTooShortError as exc:
        meta["gamma-t-peak"] = f"unresolved ({exc})"
    return rows, meta


def _jobs(scn: Scenario):
    """(worker, [job-args...], columns) for a scenario."""
    if scn.task == "epsilon":
        omegas = scn.omega_scan.grid()
        jobs = [(scn, name, omegas[i:i + _CHUNK])
                for name in scn.material_names
                for i in range(0, len(omegas), _CHUNK)]
        return _rows_epsilon, jobs, ["material", "omega_ev", "omega_scaled",
                                     "eps_re", "eps_im", "status"]
    if scn.task == "single_rate":
        omegas = scn.omega_scan.grid()
        jobs = [(scn, o, z, omegas[i:i + _CHUNK])
                for o in scn.orientations for z in scn.z_nm
                for i in range(0, len(omegas), _CHUNK)]
        return _rows_single_rate, jobs, ["material", "orientation", "z_nm",
                                         "omega_ev", "omega_scaled",
                                         "gamma_total_over_gamma0", "status"]
    if scn.task == "coupling_map":
        a_values = scn.a_scan.grid()
        jobs = [(scn, o, z, a_values, w)
                for o in scn.orientations for z in scn.z_nm
                for w in scn.omega_scan.grid()]
        return _rows_pair_scan, jobs, list(_PAIR_COLUMNS)
    if scn.task == "coupling_cut":
        jobs = [(scn, o, z, np.array([scn.a_nm]), w)
                for o in scn.orientations for z in scn.z_nm
                for w in scn.omega_scan.grid()]
        return _rows_pair_scan, jobs, list(_PAIR_COLUMNS)
    if scn.task == "shift":
        jobs = [(scn, name, o, geometry, z)
                for name in scn.material_names for o in scn.orientations
                for geometry in (ONE_SURFACE, TWO_SURFACES)
                for z in scn.z_nm]
        return _rows_shift, jobs, ["material", "orientation", "geometry",
                                   "z_nm", "h_nm", "omega_a_ev", "delta_ev",
                                   "delta_over_omega", "omega_shifted_ev",
                                   "iterations", "converged", "status"]
    if scn.task == "modes":
        return _rows_modes, [(scn,)], ["orientation", "mode_index",
                                       "rate_over_gamma0", "status"]
    if scn.task == "transport":
        cols = (["t_gamma"] + [f"n_site_{i+1}" for i in range(scn.n_atoms)]
                + ["n_total", "status"])
        return _rows_transport, [(scn,)], cols
    raise ValueError(f"unknown task {scn.task!r}")


@dataclass
class RunReport:
    paths: list[Path]
    n_rows: int
    n_failed: int


def run_scenario(scn: Scenario, output_dir=".", threads: int | None = None,
                 json_mirror: bool = False) -> RunReport:
    """Execute a scenario and write its result table(s).

    threads=None sizes the pool to the available cores; 1 avoids the
    pool entirely.  Output rows are ordered by sweep index regardless of
    completion order.
    """
    worker, jobs, columns = _jobs(scn)
    if threads is None:
        threads = os.cpu_count() or 1
    threads = max(1, threads)
    scale_label, _ = _omega_scale(scn)
    meta = {
        "generator": f"atomsurf {__version__}",
        "task": scn.task,
        "geometry": scn.geometry,
        "materials": " ".join(scn.material_names) or "(none)",
        "omega-scale": scale_label,
        "quadrature-rel-tol": _fmt(scn.quadrature.rel_tol),
        "quadrature-ellipse": f"w={scn.quadrature.ellipse_width} "
                              f"h={scn.quadrature.ellipse_height}",
    }
    if scn.omega_a_ev:
        meta["omega-a-ev"] = _fmt(scn.omega_a_ev)
    if scn.a_nm:
        meta["a-nm"] = _fmt(scn.a_nm)
    if scn.z_nm:
        meta["z-nm"] = " ".join(_fmt(z) for z in scn.z_nm)
    if scn.h_nm:
        meta["h-nm"] = _fmt(scn.h_nm)

    rows: list[tuple] = []
    aborted = 0
    try:
        if threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                outputs = list(pool.map(worker, jobs, chunksize=1))
        else:
            outputs = [worker(j) for j in jobs]
    except ConvergenceError as exc:
        # whole-scenario tasks (transport, modes) have no per-row recovery;
        # flush what there is and mark the run failed
        outputs = []
        aborted = 1
        meta["failure"] = str(exc).replace(",", ";").replace("\n", " ")
    for job_rows, job_meta in outputs:
        rows.extend(job_rows)
        meta.update(job_meta)

    meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    table = ResultTable(columns=columns, rows=rows, metadata=meta)
    out_dir = Path(output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / scn.output
    write_csv(table, csv_path)
    paths = [csv_path]
    if json_mirror:
        jpath = csv_path.with_suffix(".json")
        write_json(table, jpath)
        paths.append(jpath)
    return RunReport(paths=paths, n_rows=len(rows),
                     n_failed=table.n_failed + aborted)
