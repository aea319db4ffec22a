"""Coherent-interaction and dissipation matrices for an atom array.

For N aligned two-level dipoles at transition energy E_a near a layered
environment, the exchange interaction and the dissipation matrix are

    V_ab     = (3 gamma lambda / 2) dhat . Re G(r_a, r_b, E_a) . dhat
    Gamma_ab =  3 gamma lambda      dhat . Im G(r_a, r_b, E_a) . dhat

with G = G^0 + G^R.  Everything is reported in units of the free-space
rate gamma; V carries a zero diagonal (the single-atom surface shift is
available separately through :func:`surface_shift` and deliberately not
folded into the Hamiltonian).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import HBAR_C_EV_NM, wavelength_nm, wavenumber_nm
from .greens import (LayerStack, PathParams, bulk_green,
                     bulk_green_imag_coincident, scattering_green,
                     vacuum_coupling)

#: dipole orientation tags for the standard pair/chain configurations:
#: in-plane and orthogonal to the separation axis, normal to the
#: surface, and in-plane along the separation axis.
ORIENTATIONS = ("parallel-perp-axis", "perpendicular-to-surface",
                "aligned-with-axis")

_ORIENTATION_VECTORS = {
    "parallel-perp-axis": np.array([0.0, 1.0, 0.0]),
    "perpendicular-to-surface": np.array([0.0, 0.0, 1.0]),
    "aligned-with-axis": np.array([1.0, 0.0, 0.0]),
}


def orientation_vector(tag: str) -> np.ndarray:
    try:
        return _ORIENTATION_VECTORS[tag].copy()
    except KeyError:
        raise ValueError(f"unknown orientation {tag!r}; expected one of "
                         f"{ORIENTATIONS}")


@dataclass
class AtomArray:
    """Positions (nm), shared real dipole direction and transition energy."""

    positions_nm: np.ndarray      # (N, 3)
    dipole: np.ndarray            # unit 3-vector
    omega_a_ev: float

    def __post_init__(self):
        self.positions_nm = np.atleast_2d(np.asarray(self.positions_nm, float))
        if self.positions_nm.shape[1] != 3:
            raise ValueError("positions must be (N, 3)")
        d = np.asarray(self.dipole, dtype=float)
        norm = np.linalg.norm(d)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("dipole direction must be a nonzero vector")
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"dipole direction must be a unit vector, |d|={norm}")
        self.dipole = d / norm
        if self.omega_a_ev <= 0.0:
            raise ValueError("transition energy must be positive")
        diffs = self.positions_nm[:, None, :] - self.positions_nm[None, :, :]
        dist = np.linalg.norm(diffs, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if np.any(dist == 0.0):
            raise ValueError("atom positions must be distinct")

    @property
    def n(self) -> int:
        return self.positions_nm.shape[0]

    @property
    def wavelength_nm(self) -> float:
        return wavelength_nm(self.omega_a_ev)

    @property
    def k_nm(self) -> float:
        return wavenumber_nm(self.omega_a_ev)


def chain_array(n: int, spacing_nm: float, z_nm: float, orientation: str,
                omega_a_ev: float) -> AtomArray:
    """1D chain along x at constant height z with a standard orientation."""
    if n < 1:
        raise ValueError("chain length must be >= 1")
    pos = np.zeros((n, 3))
    pos[:, 0] = spacing_nm * np.arange(n)
    pos[:, 2] = z_nm
    return AtomArray(pos, orientation_vector(orientation), omega_a_ev)


def pair_array(spacing_nm: float, z_nm: float, orientation: str,
               omega_a_ev: float) -> AtomArray:
    return chain_array(2, spacing_nm, z_nm, orientation, omega_a_ev)


@dataclass
class CouplingSet:
    """V and Gamma in units of gamma plus the collective-mode data."""

    v: np.ndarray                 # (N, N) real symmetric, zero diagonal
    gamma: np.ndarray             # (N, N) real symmetric
    mode_rates: np.ndarray        # eigenvalues of Gamma, descending
    mode_vectors: np.ndarray      # orthogonal, columns are eigenvectors

    @property
    def n(self) -> int:
        return self.v.shape[0]


def collective_modes(gamma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal diagonalization Gamma = M diag(g_m) M^T.

    Eigenvalues are sorted descending; each eigenvector is normalized so
    its first component of significant size is positive (under
    degeneracy the basis within an eigenspace is arbitrary).
    """
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise ValueError("Gamma must be a square matrix")
    if not np.allclose(gamma, gamma.T, rtol=0, atol=1e-10 * max(1.0, np.abs(gamma).max())):
        raise ValueError("Gamma must be symmetric")
    vals, vecs = np.linalg.eigh(gamma)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    for m in range(vecs.shape[1]):
        col = vecs[:, m]
        lead = np.flatnonzero(np.abs(col) > 1e-12 * np.abs(col).max())
        if lead.size and col[lead[0]] < 0.0:
            vecs[:, m] = -col
    return vals, vecs


def _surface_pair_key(geo_a, geo_b):
    """Cache key exploiting in-plane translation/rotation invariance."""
    dx = geo_a[0] - geo_b[0]
    dy = geo_a[1] - geo_b[1]
    rho = np.hypot(dx, dy)
    return (round(float(rho), 9), round(float(geo_a[2]), 9),
            round(float(geo_b[2]), 9))


def coupling_matrices(array: AtomArray, stack: LayerStack,
                      path: Optional[PathParams] = None) -> CouplingSet:
    """Assemble V and Gamma (units of gamma) for an array in a stack.

    The scattering tensor is memoized on (rho, z_a, z_b): for a chain
    parallel to the surface the N^2 pairs collapse to O(N) distinct
    geometries.  Quadrature failures propagate with the offending pair
    identified.
    """
    n = array.n
    lam = array.wavelength_nm
    k = array.k_nm
    dhat = array.dipole
    for idx in range(n):
        if not stack.contains(array.positions_nm[idx]):
            raise ValueError(
                f"atom {idx} at {array.positions_nm[idx]} lies outside the "
                f"vacuum layer of the {stack.kind} stack")

    v = np.zeros((n, n))
    g = np.zeros((n, n))
    cache: dict[tuple, np.ndarray] = {}

    def reflected(i, j):
        ri, rj = array.positions_nm[i], array.positions_nm[j]
        key = _surface_pair_key(ri, rj)
        base = cache.get(key)
        if base is None:
            # cache the tensor for separation along +x; rotate on use
            rho = key[0]
            pos_i = np.array([rho, 0.0, ri[2]])
            pos_j = np.array([0.0, 0.0, rj[2]])
            try:
                base = scattering_green(stack, pos_i, pos_j, array.omega_a_ev,
                                        path)
            except Exception as exc:
                raise type(exc)(
                    f"{exc} [pair ({i},{j}) of the atom array]") from exc
            cache[key] = base
        dx, dy = ri[0] - rj[0], ri[1] - rj[1]
        rho = np.hypot(dx, dy)
        if rho == 0.0:
            return base
        c, s = dx / rho, dy / rho
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return rot @ base @ rot.T

    if stack.kind != "vacuum":
        for i in range(n):
            for j in range(i, n):
                gr = reflected(i, j)
                proj = complex(dhat @ gr @ dhat)
                vv = 1.5 * lam * proj.real
                gg = 3.0 * lam * proj.imag
                if i != j:
                    v[i, j] = v[j, i] = vv
                g[i, j] = g[j, i] = gg

    # bulk part: exact closed forms
    for i in range(n):
        g[i, i] += 3.0 * lam * float(
            dhat @ bulk_green_imag_coincident(k) @ dhat)
        for j in range(i + 1, n):
            rij = array.positions_nm[i] - array.positions_nm[j]
            v0, g0 = vacuum_coupling(rij, dhat, lam)
            v[i, j] += v0
            v[j, i] += v0
            g[i, j] += g0
            g[j, i] += g0

    rates, modes = collective_modes(g)
    return CouplingSet(v=v, gamma=g, mode_rates=rates, mode_vectors=modes)


@dataclass
class ShiftResult:
    """Self-consistent surface-induced level shift of one atom."""

    omega_ev: float               # bare transition energy
    omega_shifted_ev: float       # solution of w~ = w - delta(w~)
    delta_ev: float               # resulting shift
    iterations: int
    converged: bool


def surface_shift(stack: LayerStack, position, dhat, omega_ev: float,
                  gamma_ev: float, path: Optional[PathParams] = None,
                  rel_tol: float = 1e-12, max_iter: int = 50) -> ShiftResult:
    """Surface-induced transition shift by fixed-point iteration.

    delta(w~) = 3 pi c gamma (w~^2 / w^3) dhat . Re G^R(r, r, w~) . dhat,
    iterated as w~_{n+1} = w - delta(w~_n) from w~_0 = w.  gamma_ev is
    the free-space decay rate expressed in eV; all outputs are energies.
    Non-convergence is flagged in the result, not raised.
    """
    dhat = np.asarray(dhat, dtype=float)
    dhat = dhat / np.linalg.norm(dhat)
    position = np.asarray(position, dtype=float)

    def delta_of(omega_t: float) -> float:
        gr = scattering_green(stack, position, position, omega_t, path)
        proj = float(np.real(dhat @ gr @ dhat))
        return 3.0 * np.pi * HBAR_C_EV_NM * gamma_ev * omega_t**2 / omega_ev**3 * proj

    omega_t = omega_ev
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        new = omega_ev - delta_of(omega_t)
        if abs(new - omega_t) / omega_ev < rel_tol:
            omega_t = new
            converged = True
            break
        omega_t = new
    return ShiftResult(omega_ev=omega_ev, omega_shifted_ev=omega_t,
                       delta_ev=omega_ev - omega_t, iterations=iterations,
                       converged=converged)
