"""Scenario configs: one YAML file describes one figure-class computation.

All physical keys carry units in their names (z_nm, omega_a_ev, ...).
Validation accumulates every violation instead of stopping at the
first, so a config can be fixed in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .couplings import ORIENTATIONS
from .greens import ONE_SURFACE, TWO_SURFACES, VACUUM
from .materials import Material, MaterialDB, load_material_db
from .sommerfeld import PathParams

TASKS = ("epsilon", "single_rate", "coupling_map", "coupling_cut", "shift",
         "modes", "transport")

_GEOMETRIES = (VACUUM, ONE_SURFACE, TWO_SURFACES)


class ScenarioError(ValueError):
    """Config rejected; the message lists every diagnostic."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("invalid scenario config:\n  - "
                         + "\n  - ".join(self.diagnostics))


@dataclass(frozen=True)
class OmegaScan:
    start_ev: float
    stop_ev: float
    points: int
    spacing: str = "linear"

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start_ev, self.stop_ev, self.points)
        return np.linspace(self.start_ev, self.stop_ev, self.points)


@dataclass(frozen=True)
class SpacingScan:
    start_nm: float
    stop_nm: float
    points: int

    def grid(self) -> np.ndarray:
        return np.linspace(self.start_nm, self.stop_nm, self.points)


@dataclass(frozen=True)
class Scenario:
    task: str
    output: str
    material_names: tuple[str, ...] = ()
    geometry: str = VACUUM
    z_nm: tuple[float, ...] = ()
    h_nm: float | None = None
    orientations: tuple[str, ...] = ()
    n_atoms: int = 2
    a_nm: float | None = None
    omega_scan: OmegaScan | None = None
    a_scan: SpacingScan | None = None
    omega_a_ev: float | None = None
    t_max_gamma: float = 3.0
    dt_out_gamma: float = 0.005
    gamma_ev: float | None = None
    quadrature: PathParams = field(default_factory=PathParams)
    materials: dict[str, Material] = field(default_factory=dict, compare=False)

    def stack_kwargs(self, db: MaterialDB):
        """Resolved materials for LayerStack construction."""
        mats = [self.materials.get(n) or db.get(n) for n in self.material_names]
        return mats


_TOP_KEYS = {
    "task", "output", "material", "materials", "geometry", "z_nm", "h_nm",
    "orientation", "orientations", "n_atoms", "a_nm", "omega_scan", "a_scan",
    "omega_a_ev", "lambda_nm", "t_max_gamma", "dt_out_gamma", "gamma_ev",
    "quadrature",
}
_SCAN_KEYS = {"start_ev", "stop_ev", "points", "spacing"}
_ASCAN_KEYS = {"start_nm", "stop_nm", "points"}
_QUAD_KEYS = {"rel_tol", "ellipse_width", "ellipse_height", "max_evals"}

_NEEDS = {
    # task -> required keys beyond task/output
    "epsilon": {"materials", "omega_scan"},
    "single_rate": {"materials", "geometry", "z_nm", "orientations",
                    "omega_scan"},
    "coupling_map": {"materials", "geometry", "z_nm", "orientations",
                     "omega_scan", "a_scan"},
    "coupling_cut": {"materials", "geometry", "z_nm", "orientations", "a_nm",
                     "omega_scan"},
    "shift": {"materials", "z_nm", "orientations", "omega_a_ev", "gamma_ev"},
    "modes": {"geometry", "orientations", "n_atoms", "a_nm", "omega_a_ev"},
    "transport": {"geometry", "orientations", "n_atoms", "a_nm",
                  "omega_a_ev"},
}


def _as_list(value):
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def _positive(diag, doc, key, kind=float):
    v = doc.get(key)
    if v is None:
        return None
    try:
        v = kind(v)
    except (TypeError, ValueError):
        diag.append(f"{key} must be a number, got {v!r}")
        return None
    if v <= 0:
        diag.append(f"{key} must be > 0, got {v}")
        return None
    return v


def _parse(doc: dict, db: MaterialDB | None) -> tuple[Scenario | None, list[str]]:
    diag: list[str] = []
    if not isinstance(doc, dict):
        return None, ["config must be a mapping"]
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        diag.append(f"unknown keys: {sorted(unknown)}")

    task = doc.get("task")
    if task not in TASKS:
        diag.append(f"task must be one of {TASKS}, got {task!r}")
        return None, diag

    output = doc.get("output")
    if not output or not isinstance(output, str):
        diag.append("output (file name) is required")

    if "material" in doc and "materials" in doc:
        diag.append("give either 'material' or 'materials', not both")
    names = tuple(str(m) for m in _as_list(doc.get("materials"))
                  + _as_list(doc.get("material")))
    resolved: dict[str, Material] = {}
    if db is not None:
        for n in names:
            if n in db:
                resolved[n] = db.get(n)
            else:
                diag.append(f"unknown material {n!r}; known: {db.names()}")

    geometry = doc.get("geometry", VACUUM)
    if geometry not in _GEOMETRIES:
        diag.append(f"geometry must be one of {_GEOMETRIES}, got {geometry!r}")
        geometry = VACUUM

    z_list = []
    for z in _as_list(doc.get("z_nm")):
        try:
            z = float(z)
        except (TypeError, ValueError):
            diag.append(f"z_nm entries must be numbers, got {z!r}")
            continue
        if z <= 0 and geometry != VACUUM:
            diag.append(f"z_nm must be > 0 near a surface, got {z}")
        z_list.append(z)

    h_nm = _positive(diag, doc, "h_nm")
    if geometry == TWO_SURFACES:
        if task != "shift" and h_nm is None:
            diag.append("two_surfaces geometry requires h_nm > 0")
        if h_nm is not None:
            for z in z_list:
                if not 0 < z < h_nm:
                    diag.append(f"z_nm={z} outside the gap (0, {h_nm})")
        if len(names) == 1:
            names = (names[0], names[0])   # identical surfaces
        if len(names) not in (0, 2):
            diag.append("two_surfaces needs one material (identical surfaces) "
                        "or exactly two (lower, upper)")
    elif geometry == ONE_SURFACE and len(names) > 1 and task in (
            "single_rate", "coupling_map", "coupling_cut", "modes", "transport"):
        diag.append("one_surface geometry takes a single material")

    if "orientation" in doc and "orientations" in doc:
        diag.append("give either 'orientation' or 'orientations', not both")
    orientations = tuple(str(o) for o in _as_list(doc.get("orientations"))
                         + _as_list(doc.get("orientation")))
    for o in orientations:
        if o not in ORIENTATIONS:
            diag.append(f"unknown orientation {o!r}; expected {ORIENTATIONS}")

    n_atoms = doc.get("n_atoms", 2)
    if not isinstance(n_atoms, int) or n_atoms < 1:
        diag.append(f"chain length must be >= 1, got n_atoms={n_atoms!r}")
        n_atoms = 1

    a_nm = _positive(diag, doc, "a_nm")

    omega_scan = None
    if "omega_scan" in doc:
        s = doc["omega_scan"]
        if not isinstance(s, dict) or set(s) - _SCAN_KEYS:
            diag.append(f"omega_scan keys must be {sorted(_SCAN_KEYS)}")
        else:
            try:
                omega_scan = OmegaScan(float(s["start_ev"]), float(s["stop_ev"]),
                                       int(s["points"]),
                                       str(s.get("spacing", "linear")))
                if omega_scan.start_ev <= 0 or omega_scan.stop_ev <= omega_scan.start_ev:
                    diag.append("omega_scan needs 0 < start_ev < stop_ev")
                if omega_scan.points < 2:
                    diag.append("omega_scan.points must be >= 2")
                if omega_scan.spacing not in ("linear", "log"):
                    diag.append("omega_scan.spacing must be 'linear' or 'log'")
            except (KeyError, TypeError, ValueError) as exc:
                diag.append(f"bad omega_scan: {exc!r}")

    a_scan = None
    if "a_scan" in doc:
        s = doc["a_scan"]
        if not isinstance(s, dict) or set(s) - _ASCAN_KEYS:
            diag.append(f"a_scan keys must be {sorted(_ASCAN_KEYS)}")
        else:
            try:
                a_scan = SpacingScan(float(s["start_nm"]), float(s["stop_nm"]),
                                     int(s["points"]))
                if a_scan.start_nm <= 0 or a_scan.stop_nm <= a_scan.start_nm:
                    diag.append("a_scan needs 0 < start_nm < stop_nm")
                if a_scan.points < 2:
                    diag.append("a_scan.points must be >= 2")
            except (KeyError, TypeError, ValueError) as exc:
                diag.append(f"bad a_scan: {exc!r}")

    omega_a = _positive(diag, doc, "omega_a_ev")
    lam = _positive(diag, doc, "lambda_nm")
    if omega_a is not None and lam is not None:
        diag.append("give either omega_a_ev or lambda_nm, not both")
    if lam is not None:
        omega_a = 2.0 * np.pi * 197.3269804 / lam

    t_max = _positive(diag, doc, "t_max_gamma") or 3.0
    dt_out = _positive(diag, doc, "dt_out_gamma") or 0.005
    gamma_ev = _positive(diag, doc, "gamma_ev")

    quad = PathParams()
    if "quadrature" in doc:
        q = doc["quadrature"]
        if not isinstance(q, dict) or set(q) - _QUAD_KEYS:
            diag.append(f"quadrature keys must be {sorted(_QUAD_KEYS)}")
        else:
            try:
                quad = PathParams(
                    rel_tol=float(q.get("rel_tol", 1e-8)),
                    ellipse_width=float(q.get("ellipse_width", 0.5)),
                    ellipse_height=float(q.get("ellipse_height", 0.1)),
                    max_evals=int(q.get("max_evals", 200_000)))
            except (TypeError, ValueError) as exc:
                diag.append(f"bad quadrature: {exc!r}")

    # per-task requirements
    have = {
        "materials": bool(names),
        "geometry": geometry in _GEOMETRIES,
        "z_nm": bool(z_list) or geometry == VACUUM,
        "orientations": bool(orientations),
        "omega_scan": omega_scan is not None,
        "a_scan": a_scan is not None,
        "a_nm": a_nm is not None,
        "n_atoms": n_atoms >= 1,
        "omega_a_ev": omega_a is not None,
        "gamma_ev": gamma_ev is not None,
    }
    for req in sorted(_NEEDS[task]):
        if not have.get(req, False):
            diag.append(f"task {task!r} requires {req}"
                        + (" (or lambda_nm)" if req == "omega_a_ev" else ""))
    if task in ("single_rate", "coupling_map", "coupling_cut") and \
            geometry == VACUUM:
        diag.append(f"task {task!r} needs a surface geometry")
    if task in ("modes", "transport") and geometry != VACUUM and not names:
        diag.append(f"task {task!r} with {geometry} requires a material")
    if task in ("modes", "transport") and geometry != VACUUM and not z_list:
        diag.append(f"task {task!r} with {geometry} requires z_nm")

    if diag:
        return None, diag
    return Scenario(
        task=task, output=output, material_names=names, geometry=geometry,
        z_nm=tuple(z_list), h_nm=h_nm, orientations=orientations,
        n_atoms=n_atoms, a_nm=a_nm, omega_scan=omega_scan, a_scan=a_scan,
        omega_a_ev=omega_a, t_max_gamma=t_max, dt_out_gamma=dt_out,
        gamma_ev=gamma_ev, quadrature=quad, materials=resolved), []


def validate_config(path, db: MaterialDB | None = None) -> list[str]:
    """All schema violations of a config file ('ok' means empty list)."""
    p = Path(path)
    if not p.is_file():
        return [f"config file not found: {p}"]
    try:
        doc = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        return [f"invalid YAML: {exc}"]
    if db is None:
        db = load_material_db()
    _, diag = _parse(doc, db)
    return diag


def load_scenario(path, db: MaterialDB | None = None) -> Scenario:
    """Parse and validate; raises ScenarioError carrying all diagnostics."""
    p = Path(path)
    if not p.is_file():
        raise ScenarioError([f"config file not found: {p}"])
    try:
        doc = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError([f"invalid YAML: {exc}"])
    if db is None:
        db = load_material_db()
    scenario, diag = _parse(doc, db)
    if diag:
        raise ScenarioError(diag)
    return scenario
