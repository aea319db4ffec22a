"""Electromagnetic Green tensors for vacuum and planar layered media.

Everything is expressed in eV/nm units: wavenumbers k = E/(hbar c) in
nm^-1, positions in nm, tensors in nm^-1.  The z axis is normal to the
interfaces, the (single or lower) interface sits at z = 0 and the atoms
live in the vacuum layer above it (between the interfaces for a two
surface stack of gap height h).

The scattered part is a Sommerfeld integral over the in-plane
wavenumber.  The integrand is assembled for an in-plane separation
along +x (where all azimuthal factors are unambiguous) and the full
tensor for an arbitrary separation is recovered by conjugating with the
rotation about z that maps x onto the actual in-plane direction.  This
keeps the tensor exactly rotation covariant and reciprocal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import jv

from .constants import wavenumber_nm
from .materials import Material, PerfectConductor, epsilon
from .sommerfeld import PathParams, SommerfeldResult, sommerfeld_integrate

VACUUM = "vacuum"
ONE_SURFACE = "one_surface"
TWO_SURFACES = "two_surfaces"


@dataclass(frozen=True)
class LayerStack:
    """Planar environment: no, one (below) or two (below+above) interfaces."""

    kind: str = VACUUM
    lower: Optional[Material] = None          # eps_II, interface at z = 0
    upper: Optional[Material] = None          # eps_I, interface at z = h
    height_nm: Optional[float] = None         # gap h (two surfaces only)

    def __post_init__(self):
        if self.kind not in (VACUUM, ONE_SURFACE, TWO_SURFACES):
            raise ValueError(f"unknown stack kind {self.kind!r}")
        if self.kind == VACUUM:
            return
        if self.lower is None:
            raise ValueError(f"{self.kind} stack needs a lower material")
        if self.kind == TWO_SURFACES:
            if self.upper is None:
                raise ValueError("two_surfaces stack needs an upper material")
            if self.height_nm is None or not self.height_nm > 0.0:
                raise ValueError("two_surfaces stack needs gap height h > 0")

    def contains(self, position) -> bool:
        """True if the position lies strictly inside the vacuum layer."""
        z = float(np.asarray(position, dtype=float)[2])
        if self.kind == VACUUM:
            return True
        if self.kind == ONE_SURFACE:
            return z > 0.0
        return 0.0 < z < self.height_nm


@dataclass(frozen=True)
class WaveGeometry:
    """Reduced geometry of a source/observer pair in a layered stack."""

    k: float          # omega/c, nm^-1
    rho: float        # in-plane separation, nm
    phi: float        # azimuth of the in-plane separation, rad
    z_a: float        # observer height, nm
    z_b: float        # source height, nm


def _pair_geometry(r_a, r_b, k: float) -> WaveGeometry:
    r_a = np.asarray(r_a, dtype=float)
    r_b = np.asarray(r_b, dtype=float)
    dx, dy = r_a[0] - r_b[0], r_a[1] - r_b[1]
    rho = float(np.hypot(dx, dy))
    phi = float(np.arctan2(dy, dx)) if rho > 0.0 else 0.0
    return WaveGeometry(k=k, rho=rho, phi=phi, z_a=float(r_a[2]), z_b=float(r_b[2]))


# ---------------------------------------------------------------------------
# bulk (vacuum) tensor and the closed-form couplings


def bulk_green(r_vec, k: float) -> np.ndarray:
    """Homogeneous-space Green tensor at separation r_vec (nm), in nm^-1.

    Closed-form evaluation of (grad grad + k^2) e^{ikr}/(4 pi k^2 r);
    the coincident point is excluded because the real part diverges
    there (the imaginary part has the finite limit k/(6 pi) * identity,
    see :func:`bulk_green_imag_coincident`).
    """
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise ValueError(
            "bulk Green tensor requested at zero separation; only the "
            "imaginary part exists there (bulk_green_imag_coincident)")
    rhat = r_vec / r
    kr = k * r
    pref = np.exp(1j * kr) / (4.0 * np.pi * r)
    p = 1.0 + 1j / kr - 1.0 / kr**2
    q = -1.0 - 3j / kr + 3.0 / kr**2
    return pref * (p * np.eye(3) + q * np.outer(rhat, rhat))


def bulk_green_imag_coincident(k: float) -> np.ndarray:
    """Im G^0 at coincident points: (k / 6 pi) * identity."""
    return k / (6.0 * np.pi) * np.eye(3)


def _pair_terms(r_vec, d_a, d_b, k: float):
    """exp(ikr) * (P d_a.d_b + Q (d_a.r)(d_b.r)) and kappa, shared helper."""
    r_vec = np.asarray(r_vec, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r == 0.0:
        raise ValueError("coupling undefined at zero separation")
    rhat = r_vec / r
    kr = k * r
    p = 1.0 + 1j / kr - 1.0 / kr**2
    q = -1.0 - 3j / kr + 3.0 / kr**2
    amp = np.exp(1j * kr) * (p * float(np.dot(d_a, d_b))
                             + q * float(np.dot(d_a, rhat) * np.dot(d_b, rhat)))
    return amp, kr


def vacuum_coupling_general(r_vec, d_a, d_b, lam: float) -> tuple[float, float]:
    """(V0/gamma, Gamma0/gamma) for two differently oriented unit dipoles."""
    k = 2.0 * np.pi / lam
    amp, kappa = _pair_terms(r_vec, d_a, d_b, k)
    v0 = 0.75 * float(np.real(amp)) / kappa
    g0 = 1.5 * float(np.imag(amp)) / kappa
    return v0, g0


def vacuum_coupling(r_vec, dhat, lam: float) -> tuple[float, float]:
    """Free-space coherent coupling V0 and collective decay Gamma0.

    Both are returned in units of the single-atom rate gamma, for a pair
    of aligned unit dipoles dhat separated by r_vec at wavelength lam.
    Equivalent to the textbook closed forms

        V0/g  = 3/4 [ (1-c) cos(x)/x - (1-3c)(sin(x)/x^2 + cos(x)/x^3) ]
        G0/g  = 3/2 [ (1-c) sin(x)/x + (1-3c)(cos(x)/x^2 - sin(x)/x^3) ]

    with x = 2 pi r / lam and c = (dhat . rhat)^2.
    """
    return vacuum_coupling_general(r_vec, dhat, dhat, lam)


# ---------------------------------------------------------------------------
# Fresnel reflection and the scattering tensor


def _branch_sqrt(z2):
    """sqrt with Im >= 0 (and Re >= 0 on the real-elliptic branch)."""
    kz = np.sqrt(np.asarray(z2, dtype=complex))
    return np.where(kz.imag < 0.0, -kz, kz)


def fresnel(pol: str, k_rho, omega_ev: float, eps) -> np.ndarray:
    """Fresnel reflection coefficient at a vacuum/material interface.

    pol is 's' or 'p'; k_rho may be a (complex) array.  eps = inf is the
    perfect-conductor limit (r_p = +1, r_s = -1).
    """
    k_rho = np.asarray(k_rho, dtype=complex)
    if pol not in ("s", "p"):
        raise ValueError(f"polarization must be 's' or 'p', got {pol!r}")
    if np.isinf(np.real(eps)):
        return np.full_like(k_rho, 1.0 if pol == "p" else -1.0)
    k = wavenumber_nm(omega_ev)
    kz = _branch_sqrt(k**2 - k_rho**2)
    kiz = _branch_sqrt(eps * k**2 - k_rho**2)
    if pol == "p":
        num, den = eps * kz - kiz, eps * kz + kiz
    else:
        num, den = kz - kiz, kz + kiz
    # eps = 1 makes the numerator vanish identically; at the k_rho = k
    # branch point that would otherwise be an ill-defined 0/0
    with np.errstate(invalid="ignore", divide="ignore"):
        r = num / den
    return np.where(num == 0.0, 0.0, r)


def _reflection_eps(material: Material, omega_ev: float):
    if isinstance(material, PerfectConductor):
        return complex(np.inf, 0.0)
    return epsilon(material, omega_ev)


def scattering_green(stack: LayerStack, r_a, r_b, omega_ev: float,
                     path: PathParams | None = None,
                     return_error: bool = False):
    """Scattering part G^R of the Green tensor between r_a and r_b.

    Evaluates the reflected-field Sommerfeld integral for one or two
    interfaces; for a single interface no gap height is involved (the
    formal e^{i k_z h} prefactor cancels against the interface
    coefficients).  Both points must lie strictly inside the vacuum
    layer.  Returns a 3x3 complex array in nm^-1; with
    ``return_error=True`` also returns a componentwise error bound.
    """
    path = path or PathParams()
    k = wavenumber_nm(omega_ev)
    if stack.kind == VACUUM:
        g = np.zeros((3, 3), dtype=complex)
        return (g, np.zeros((3, 3))) if return_error else g
    for name, pos in (("r_a", r_a), ("r_b", r_b)):
        if not stack.contains(pos):
            raise ValueError(
                f"{name}={np.asarray(pos)} is outside the vacuum layer of "
                f"the {stack.kind} stack")

    geo = _pair_geometry(r_a, r_b, k)
    eps_lo = _reflection_eps(stack.lower, omega_ev)
    two = stack.kind == TWO_SURFACES
    eps_up = _reflection_eps(stack.upper, omega_ev) if two else None
    h = stack.height_nm if two else None
    zsum = geo.z_a + geo.z_b
    zdif = geo.z_a - geo.z_b

    def integrand(k_rho):
        kz = _branch_sqrt(k**2 - k_rho**2)
        rs_lo = fresnel("s", k_rho, omega_ev, eps_lo)
        rp_lo = fresnel("p", k_rho, omega_ev, eps_lo)
        up = np.exp(1j * kz * zsum)
        if two:
            rs_up = fresnel("s", k_rho, omega_ev, eps_up)
            rp_up = fresnel("p", k_rho, omega_ev, eps_up)
            wgap = np.exp(2j * kz * h)
            vp = np.exp(1j * kz * (2.0 * h - zsum))
            cos_d = np.cos(kz * zdif)
            sin_d = np.sin(kz * zdif)
            ds = 1.0 - rs_up * rs_lo * wgap
            dp = 1.0 - rp_up * rp_lo * wgap
            base_s = rs_lo * up + rs_up * vp
            base_p = rp_lo * up + rp_up * vp
            cs_p = (base_s + 2.0 * rs_up * rs_lo * cos_d * wgap) / ds
            cp_p = (base_p + 2.0 * rp_up * rp_lo * cos_d * wgap) / dp
            cp_m = (base_p - 2.0 * rp_up * rp_lo * cos_d * wgap) / dp
            ep_p = (base_p + 2j * rp_up * rp_lo * sin_d * wgap) / dp
            ep_m = (base_p - 2j * rp_up * rp_lo * sin_d * wgap) / dp
        else:
            cs_p = rs_lo * up
            cp_p = cp_m = ep_p = ep_m = rp_lo * up

        x = k_rho * geo.rho
        j0 = jv(0, x)
        j1 = jv(1, x)
        j2 = jv(2, x)
        kz2_k2 = kz**2 / k**2
        m_xx = 0.5 * (cs_p * (j0 + j2) - kz2_k2 * cp_m * (j0 - j2))
        m_yy = 0.5 * (cs_p * (j0 - j2) - kz2_k2 * cp_m * (j0 + j2))
        m_zz = (k_rho**2 / k**2) * cp_p * j0
        m_xz = -1j * (k_rho * kz / k**2) * ep_p * j1
        m_zx = 1j * (k_rho * kz / k**2) * ep_m * j1
        weight = k_rho / kz
        return np.stack([m_xx, m_yy, m_zz, m_xz, m_zx], axis=-1) * weight[..., None]

    try:
        res: SommerfeldResult = sommerfeld_integrate(integrand, k, path)
    except Exception as exc:
        exc.args = (f"{exc.args[0] if exc.args else exc!r} "
                    f"[scattering tensor at omega={omega_ev} eV, rho={geo.rho} nm, "
                    f"z=({geo.z_a}, {geo.z_b}) nm]",) + exc.args[1:]
        raise

    pref = 1j / (4.0 * np.pi)
    gxx, gyy, gzz, gxz, gzx = pref * res.value
    g0 = np.array([[gxx, 0.0, gxz],
                   [0.0, gyy, 0.0],
                   [gzx, 0.0, gzz]], dtype=complex)
    c, s = np.cos(geo.phi), np.sin(geo.phi)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    g = rot @ g0 @ rot.T
    if not return_error:
        return g
    exx, eyy, ezz, exz, ezx = np.abs(pref) * res.error
    e0 = np.array([[exx, 0.0, exz], [0.0, eyy, 0.0], [ezx, 0.0, ezz]])
    err = np.abs(rot) @ e0 @ np.abs(rot.T)
    return g, err
