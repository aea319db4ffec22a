"""Parametric complex dielectric functions and the bundled material database.

Three oscillator models are supported:

* Drude           eps(w) = 1 - wp^2 / (w^2 + i w gp)
* Drude-Lorentz   eps(w) = 1 + sum_j f_j wp^2 / (wj^2 - w^2 - i w gj)
                  (the j=0 term has wj=0 and reduces to the Drude model)
* modified Lorentz (Gaussian-broadened damping)
                  eps(w) = eps_inf + sum_j f_j wj^2 / (w^2 - wj^2 - i w gj')
                  with gj' = gj * exp(-alpha_j ((w - wj)/gj)^2)

plus a perfect-conductor tag used for the ideal-mirror limit.  All
parameters and arguments are energies in eV.  Parameter values live in
versioned data files under ``data/materials``; they are never
hard-coded here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
import yaml

_DATA_DIR = Path(__file__).parent / "data" / "materials"


class MaterialError(Exception):
    """Base class for material/database problems."""


class MalformedMaterialError(MaterialError):
    """A material file parsed but violates the schema."""


class UnknownModelError(MaterialError):
    """A material file declares a model tag we do not implement."""


class UnknownMaterialError(MaterialError, KeyError):
    """Lookup of a material name that is not in the database."""


@dataclass(frozen=True)
class DrudeParams:
    """Free-electron metal: plasma energy and damping, both in eV."""

    plasma_energy_ev: float
    damping_energy_ev: float

    def __post_init__(self):
        if not self.plasma_energy_ev > 0.0:
            raise MalformedMaterialError(
                f"Drude plasma energy must be > 0, got {self.plasma_energy_ev}")
        if self.damping_energy_ev < 0.0:
            raise MalformedMaterialError(
                f"Drude damping must be >= 0, got {self.damping_energy_ev}")


@dataclass(frozen=True)
class DLOscillator:
    """One Drude-Lorentz resonance: weight f, resonance/damping in eV."""

    f: float
    omega_ev: float
    gamma_ev: float


@dataclass(frozen=True)
class DrudeLorentzParams:
    """Drude term plus bound-electron resonances (Rakic-style fit)."""

    plasma_energy_ev: float
    oscillators: tuple[DLOscillator, ...]

    def __post_init__(self):
        if not self.plasma_energy_ev > 0.0:
            raise MalformedMaterialError(
                f"plasma energy must be > 0, got {self.plasma_energy_ev}")
        if not self.oscillators:
            raise MalformedMaterialError("Drude-Lorentz needs >= 1 oscillator")
        if self.oscillators[0].omega_ev != 0.0:
            raise MalformedMaterialError(
                "first Drude-Lorentz oscillator must sit at omega = 0 "
                f"(pure Drude term), got {self.oscillators[0].omega_ev} eV")
        for osc in self.oscillators:
            if osc.f < 0.0 or osc.gamma_ev < 0.0 or osc.omega_ev < 0.0:
                raise MalformedMaterialError(
                    f"negative Drude-Lorentz parameter in {osc}")


@dataclass(frozen=True)
class MLOscillator:
    """Modified-Lorentz resonance with Gaussian damping profile."""

    f: float
    omega_ev: float
    gamma_ev: float
    alpha: float


@dataclass(frozen=True)
class ModifiedLorentzParams:
    """Background constant plus Gaussian-broadened Lorentz resonances."""

    eps_infinity: float
    oscillators: tuple[MLOscillator, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.eps_infinity < 1.0:
            raise MalformedMaterialError(
                f"eps_infinity must be >= 1, got {self.eps_infinity}")
        for osc in self.oscillators:
            # gamma enters the Gaussian denominator, so strictly positive
            if not osc.gamma_ev > 0.0:
                raise MalformedMaterialError(
                    f"modified-Lorentz damping must be > 0 in {osc}")


@dataclass(frozen=True)
class PerfectConductor:
    """Ideal mirror: r_p = +1, r_s = -1 at every angle and frequency."""


Material = Union[DrudeParams, DrudeLorentzParams, ModifiedLorentzParams,
                 PerfectConductor]


def _check_omega(omega_ev):
    w = np.asarray(omega_ev, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError(f"frequency must be > 0 eV, got {omega_ev}")
    return w


def eval_drude(p: DrudeParams, omega_ev):
    """Drude permittivity at omega (eV); scalar in, scalar out."""
    w = _check_omega(omega_ev)
    eps = 1.0 - p.plasma_energy_ev**2 / (w * (w + 1j * p.damping_energy_ev))
    return complex(eps) if np.isscalar(omega_ev) else eps


def eval_drude_lorentz(p: DrudeLorentzParams, omega_ev):
    """Drude-Lorentz permittivity at omega (eV)."""
    w = _check_omega(omega_ev)
    eps = np.ones_like(w, dtype=complex)
    wp2 = p.plasma_energy_ev**2
    for osc in p.oscillators:
        eps += osc.f * wp2 / (osc.omega_ev**2 - w**2 - 1j * w * osc.gamma_ev)
    return complex(eps) if np.isscalar(omega_ev) else eps


def eval_modified_lorentz(p: ModifiedLorentzParams, omega_ev):
    """Modified-Lorentz permittivity with frequency-dependent damping."""
    w = _check_omega(omega_ev)
    eps = np.full_like(w, p.eps_infinity, dtype=complex)
    for osc in p.oscillators:
        gp = osc.gamma_ev * np.exp(
            -osc.alpha * ((w - osc.omega_ev) / osc.gamma_ev) ** 2)
        eps += osc.f * osc.omega_ev**2 / (w**2 - osc.omega_ev**2 - 1j * w * gp)
    return complex(eps) if np.isscalar(omega_ev) else eps


def epsilon(material: Material, omega_ev):
    """Dispatch to the right evaluator; PEC maps to eps = inf."""
    if isinstance(material, DrudeParams):
        return eval_drude(material, omega_ev)
    if isinstance(material, DrudeLorentzParams):
        return eval_drude_lorentz(material, omega_ev)
    if isinstance(material, ModifiedLorentzParams):
        return eval_modified_lorentz(material, omega_ev)
    if isinstance(material, PerfectConductor):
        _check_omega(omega_ev)
        return complex(math.inf, 0.0)
    raise TypeError(f"not a material: {material!r}")


def plasma_energy_ev(material: Material) -> float | None:
    """Plasma energy for metals, None for other models."""
    if isinstance(material, (DrudeParams, DrudeLorentzParams)):
        return material.plasma_energy_ev
    return None


# ---------------------------------------------------------------------------
# database loading

_TOP_KEYS = {"name", "model", "source"}
_MODEL_KEYS = {
    "drude": _TOP_KEYS | {"plasma_energy_ev", "damping_energy_ev"},
    "drude-lorentz": _TOP_KEYS | {"plasma_energy_ev", "oscillators"},
    "modified-lorentz": _TOP_KEYS | {"eps_infinity", "oscillators"},
    "perfect-conductor": _TOP_KEYS,
}
_DL_OSC_KEYS = {"f", "omega_ev", "gamma_ev"}
_ML_OSC_KEYS = {"f", "omega_ev", "gamma_ev", "alpha"}


def _parse_oscillators(raw, keys, cls, path):
    if not isinstance(raw, list):
        raise MalformedMaterialError(f"{path}: 'oscillators' must be a list")
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise MalformedMaterialError(
                f"{path}: oscillator {i} must be a mapping, got {entry!r}")
        unknown = set(entry) - keys
        if unknown:
            raise MalformedMaterialError(
                f"{path}: oscillator {i} has unknown keys {sorted(unknown)}")
        missing = keys - set(entry)
        if missing:
            raise MalformedMaterialError(
                f"{path}: oscillator {i} missing keys {sorted(missing)}")
        out.append(cls(**{k: float(entry[k]) for k in keys}))
    return tuple(out)


def parse_material(doc: dict, path: str = "<memory>") -> tuple[str, Material]:
    """Parse one material document; returns (name, params).

    Unknown keys, missing keys and unknown model tags each raise a
    distinct error so callers can tell schema drift from typos.
    """
    if not isinstance(doc, dict):
        raise MalformedMaterialError(f"{path}: top level must be a mapping")
    model = doc.get("model")
    if model is None:
        raise MalformedMaterialError(f"{path}: missing 'model' tag")
    if model not in _MODEL_KEYS:
        raise UnknownModelError(
            f"{path}: unknown model tag {model!r}; "
            f"expected one of {sorted(_MODEL_KEYS)}")
    allowed = _MODEL_KEYS[model]
    unknown = set(doc) - allowed
    if unknown:
        raise MalformedMaterialError(
            f"{path}: unknown keys {sorted(unknown)} for model {model!r}")
    for key in ("name", "source"):
        if key not in doc:
            raise MalformedMaterialError(f"{path}: missing required key {key!r}")
    name = str(doc["name"])
    try:
        if model == "drude":
            mat = DrudeParams(float(doc["plasma_energy_ev"]),
                              float(doc["damping_energy_ev"]))
        elif model == "drude-lorentz":
            mat = DrudeLorentzParams(
                float(doc["plasma_energy_ev"]),
                _parse_oscillators(doc.get("oscillators"), _DL_OSC_KEYS,
                                   DLOscillator, path))
        elif model == "modified-lorentz":
            mat = ModifiedLorentzParams(
                float(doc["eps_infinity"]),
                _parse_oscillators(doc.get("oscillators", []), _ML_OSC_KEYS,
                                   MLOscillator, path))
        else:
            mat = PerfectConductor()
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedMaterialError(f"{path}: {exc}") from exc
    return name, mat


class MaterialDB:
    """Immutable name -> parameter-set map loaded from YAML files."""

    def __init__(self, entries: dict[str, Material],
                 sources: dict[str, str] | None = None):
        self._entries = dict(entries)
        self._sources = dict(sources or {})

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def names(self) -> list[str]:
        return sorted(self._entries)

    def get(self, name: str) -> Material:
        try:
            return self._entries[name]
        except KeyError:
            raise UnknownMaterialError(
                f"material not found: {name!r}; known: {self.names()}")

    def source(self, name: str) -> str:
        self.get(name)
        return self._sources.get(name, "")


def load_material_file(path) -> tuple[str, Material, str]:
    """Load one material YAML file -> (name, params, source string)."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"material file not found: {p}")
    try:
        doc = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise MalformedMaterialError(f"{p}: invalid YAML: {exc}") from exc
    name, mat = parse_material(doc, str(p))
    return name, mat, str(doc.get("source", ""))


def load_material_db(path=None) -> MaterialDB:
    """Load all material files from a directory (default: bundled data)."""
    root = Path(path) if path is not None else _DATA_DIR
    if not root.is_dir():
        raise FileNotFoundError(f"material directory not found: {root}")
    entries, sources = {}, {}
    files = sorted(root.glob("*.yaml"))
    if not files:
        raise FileNotFoundError(f"no material files (*.yaml) in {root}")
    for f in files:
        name, mat, src = load_material_file(f)
        entries[name] = mat
        sources[name] = src
    return MaterialDB(entries, sources)
