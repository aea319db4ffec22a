"""Scattering Green tensor: vacuum recovery, mirror oracles, reciprocity."""

import numpy as np
import pytest
from scipy.special import jv

from atomsurf.constants import HBAR_C_EV_NM
from atomsurf.greens import (LayerStack, _branch_sqrt, fresnel,
                             scattering_green, vacuum_coupling,
                             vacuum_coupling_general)
from atomsurf.materials import (DrudeParams, ModifiedLorentzParams,
                                PerfectConductor, load_material_db)
from atomsurf.sommerfeld import PathParams, sommerfeld_integrate

PEC = PerfectConductor()
VAC_MAT = ModifiedLorentzParams(1.0, ())
MIRROR = LayerStack(kind="one_surface", lower=PEC)
DB = load_material_db()


def gamma_perp_mirror(x):
    return 1.0 + 3.0 * (np.sin(x) / x**3 - np.cos(x) / x**2)


def gamma_par_mirror(x):
    return 1.0 - 1.5 * (np.sin(x) / x + np.cos(x) / x**2 - np.sin(x) / x**3)


def rate_and_coupling(stack, r_a, r_b, dhat, omega):
    lam = 2 * np.pi * HBAR_C_EV_NM / omega
    g = scattering_green(stack, r_a, r_b, omega)
    proj = complex(np.asarray(dhat) @ g @ np.asarray(dhat))
    return 1.5 * lam * proj.real, 3.0 * lam * proj.imag


def test_fresnel_no_interface():
    k = 2.0 / HBAR_C_EV_NM
    k_rho = np.linspace(0.0, 3.0, 7) * k
    for pol in ("s", "p"):
        assert np.allclose(fresnel(pol, k_rho, 2.0, 1.0 + 0j), 0.0)


def test_fresnel_perfect_conductor_limit():
    k = 2.0 / HBAR_C_EV_NM
    k_rho = np.linspace(0.0, 3.0, 7) * k
    assert np.allclose(fresnel("p", k_rho, 2.0, np.inf), 1.0)
    assert np.allclose(fresnel("s", k_rho, 2.0, np.inf), -1.0)
    # large finite eps approaches the ideal values pointwise, except at
    # the grazing point k_rho = k where r_p = -1 for every finite eps
    k_rho = np.array([0.0, 0.5, 0.9, 1.2, 3.0]) * k
    assert np.allclose(fresnel("p", k_rho, 2.0, -1e8 + 1e4j), 1.0, atol=1e-3)
    assert np.allclose(fresnel("s", k_rho, 2.0, -1e8 + 1e4j), -1.0, atol=1e-3)


def test_fresnel_normal_incidence_eps4():
    # k_z = k, k_iz = 2k: r_s = -1/3 and r_p = +1/3
    r_s = fresnel("s", 0.0, 1.7, 4.0 + 0j)
    r_p = fresnel("p", 0.0, 1.7, 4.0 + 0j)
    assert complex(r_s) == pytest.approx(-1.0 / 3.0, rel=1e-14)
    assert complex(r_p) == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_fresnel_branch_has_positive_imaginary_kz():
    # evanescent range: |r_s| = 1 for a lossless dielectric is wrong;
    # the decaying-branch choice keeps |r| <= 1 in the propagating range
    # and finite beyond it
    omega = 2.0
    k = omega / HBAR_C_EV_NM
    r = fresnel("s", np.array([0.5 * k, 2.0 * k]), omega, 2.25 + 0j)
    assert np.all(np.abs(r) <= 1.0 + 1e-12)
    assert np.all(np.isfinite(r))


def test_fresnel_rejects_unknown_polarization():
    with pytest.raises(ValueError, match="polarization"):
        fresnel("q", 0.0, 1.0, 2.0 + 0j)


def test_vacuum_recovery_one_and_two_surfaces():
    rng = np.random.default_rng(42)
    one = LayerStack(kind="one_surface", lower=VAC_MAT)
    two = LayerStack(kind="two_surfaces", lower=VAC_MAT, upper=VAC_MAT,
                     height_nm=600.0)
    for _ in range(5):
        z1, z2 = rng.uniform(20, 500, 2)
        rho = rng.uniform(0, 400)
        omega = rng.uniform(0.5, 6.0)
        r1 = np.array([0.0, 0.0, z1])
        r2 = np.array([rho, 30.0, z2])
        for stack in (one, two):
            g = scattering_green(stack, r1, r2, omega)
            assert np.abs(g).max() < 1e-10


def test_mirror_coincident_rates_match_image_closed_forms():
    omega = 2.0
    k = omega / HBAR_C_EV_NM
    for kz in np.linspace(0.3, 12.0, 15):
        z = kz / k
        x = 2.0 * kz
        _, g_perp = rate_and_coupling(MIRROR, [0, 0, z], [0, 0, z], [0, 0, 1], omega)
        _, g_par = rate_and_coupling(MIRROR, [0, 0, z], [0, 0, z], [1, 0, 0], omega)
        assert 1.0 + g_perp == pytest.approx(gamma_perp_mirror(x), rel=1e-6)
        assert 1.0 + g_par == pytest.approx(gamma_par_mirror(x), rel=1e-6)


def test_mirror_short_distance_limits():
    omega = 2.0
    k = omega / HBAR_C_EV_NM
    z = 0.05 / k
    _, g_perp = rate_and_coupling(MIRROR, [0, 0, z], [0, 0, z], [0, 0, 1], omega)
    _, g_par = rate_and_coupling(MIRROR, [0, 0, z], [0, 0, z], [1, 0, 0], omega)
    assert 1.0 + g_perp == pytest.approx(2.0, rel=0.02)
    assert 1.0 + g_par == pytest.approx(0.0, abs=0.02)


@pytest.mark.parametrize("dhat,sign", [
    (np.array([0.0, 0.0, 1.0]), +1.0),   # z dipole: image adds in phase
    (np.array([1.0, 0.0, 0.0]), -1.0),   # in-plane dipole: image flipped
    (np.array([0.0, 1.0, 0.0]), -1.0),
])
def test_mirror_pair_couplings_match_image_construction(dhat, sign):
    omega = 1.3
    lam = 2 * np.pi * HBAR_C_EV_NM / omega
    k = omega / HBAR_C_EV_NM
    for kz in (0.4, 1.7, 6.0):
        z = kz / k
        r_a = np.array([0.0, 0.0, z])
        r_b = np.array([2.0 * z, 0.7 * z, z])
        v_s, g_s = rate_and_coupling(MIRROR, r_a, r_b, dhat, omega)
        image = r_b * np.array([1.0, 1.0, -1.0])
        v_i, g_i = vacuum_coupling(r_a - image, dhat, lam)
        assert v_s == pytest.approx(sign * v_i, rel=1e-6, abs=1e-9)
        assert g_s == pytest.approx(sign * g_i, rel=1e-6, abs=1e-9)


def test_mirror_pair_with_tilted_dipole():
    # general orientation: image dipole is diag(-1,-1,1) . d
    omega = 2.4
    lam = 2 * np.pi * HBAR_C_EV_NM / omega
    d = np.array([0.48, -0.6, 0.64])
    d /= np.linalg.norm(d)
    flip = np.diag([-1.0, -1.0, 1.0])          # moment of the image dipole
    r_a = np.array([0.0, 10.0, 130.0])
    r_b = np.array([160.0, -40.0, 75.0])
    image = r_b * np.array([1.0, 1.0, -1.0])   # mirrored position
    v_s, g_s = rate_and_coupling(MIRROR, r_a, r_b, d, omega)
    v_i, g_i = vacuum_coupling_general(r_a - image, d, flip @ d, lam)
    assert v_s == pytest.approx(v_i, rel=1e-6)
    assert g_s == pytest.approx(g_i, rel=1e-6)


def test_reciprocity_two_lossy_surfaces():
    stack = LayerStack(kind="two_surfaces", lower=DB.get("Ag"),
                       upper=DB.get("Au"), height_nm=420.0)
    rng = np.random.default_rng(3)
    for _ in range(4):
        r1 = np.array([rng.uniform(-200, 200), rng.uniform(-200, 200),
                       rng.uniform(20, 400)])
        r2 = np.array([rng.uniform(-200, 200), rng.uniform(-200, 200),
                       rng.uniform(20, 400)])
        omega = rng.uniform(0.8, 5.0)
        g12 = scattering_green(stack, r1, r2, omega)
        g21 = scattering_green(stack, r2, r1, omega)
        scale = np.abs(g12).max()
        assert np.abs(g12 - g21.T).max() < 1e-8 * scale


@pytest.mark.parametrize("h", [50.0, 200.0, 800.0, 2000.0])
def test_two_surface_with_vacuum_top_equals_one_surface(h):
    two = LayerStack(kind="two_surfaces", lower=DB.get("Ag"),
                     upper=DB.get("Vacuum"), height_nm=h)
    one = LayerStack(kind="one_surface", lower=DB.get("Ag"))
    z = min(0.4 * h, 100.0)
    r1 = np.array([0.0, 0.0, z])
    r2 = np.array([120.0, 0.0, 0.5 * z])
    ga = scattering_green(two, r1, r2, 1.8)
    gb = scattering_green(one, r1, r2, 1.8)
    assert np.abs(ga - gb).max() <= 1e-8 * np.abs(gb).max()


def test_path_geometry_independence_within_error():
    stack = LayerStack(kind="one_surface", lower=DB.get("Ag"))
    r1 = np.array([0.0, 0.0, 40.0])
    r2 = np.array([150.0, 80.0, 90.0])
    omega = 3.4
    g0, e0 = scattering_green(stack, r1, r2, omega, return_error=True)
    for pp in (PathParams(ellipse_height=0.2), PathParams(ellipse_width=0.25)):
        g1, e1 = scattering_green(stack, r1, r2, omega, pp, return_error=True)
        assert np.all(np.abs(g1 - g0) <= e0 + e1 + 1e-16)


def test_atom_outside_layer_rejected():
    with pytest.raises(ValueError, match="outside the vacuum layer"):
        scattering_green(MIRROR, [0, 0, -5.0], [0, 0, 10.0], 2.0)
    two = LayerStack(kind="two_surfaces", lower=PEC, upper=PEC, height_nm=100.0)
    with pytest.raises(ValueError, match="outside the vacuum layer"):
        scattering_green(two, [0, 0, 50.0], [0, 0, 130.0], 2.0)


def test_large_eps_approaches_perfect_conductor():
    omega = 0.6
    k = omega / HBAR_C_EV_NM
    z = 0.8 / k
    metal = DrudeParams(500.0, 1e-4)
    near = LayerStack(kind="one_surface", lower=metal)
    g_pec = scattering_green(MIRROR, [0, 0, z], [0, 0, z], omega)
    g_metal = scattering_green(near, [0, 0, z], [0, 0, z], omega)
    assert np.allclose(g_metal, g_pec, rtol=5e-3, atol=1e-9)


def _mirror_lattice_rate(orientation, k, h, z0, n_images=20000):
    """Coincident decay rate between two ideal mirrors via the image lattice.

    Images of a source at z0 sit at 2mh +- z0; in-plane dipole moments
    flip sign once per reflection, vertical ones never do.  The sum is
    evaluated with the closed-form pair rate for vertical separations
    (independent of the layered-media integral), with a window average
    over one oscillation period to tame the conditional convergence of
    the in-plane case.
    """
    m = np.arange(1, n_images)
    if orientation == "perp":
        def pair_rate(x):
            return 3.0 * (np.sin(x) / x**3 - np.cos(x) / x**2)
        signs = (1.0, 1.0, 1.0, 1.0)
    else:
        def pair_rate(x):
            return 1.5 * (np.sin(x) / x + np.cos(x) / x**2
                          - np.sin(x) / x**3)
        signs = (1.0, 1.0, -1.0, -1.0)      # odd-reflection families flip
    terms = np.zeros(n_images)
    terms[0] = signs[2] * pair_rate(k * 2.0 * z0)          # lower image
    dists = (2 * m * h, 2 * m * h, 2 * m * h - 2 * z0, 2 * m * h + 2 * z0)
    for s, d in zip(signs, dists):
        terms[1:] += s * pair_rate(k * d)
    partial = 1.0 + np.cumsum(terms)
    window = max(4, int(np.ceil(4 * np.pi / (k * h))))
    return partial[-window:].mean()


@pytest.mark.parametrize("kh", [4.5, 7.7])
def test_two_mirror_rates_match_image_lattice(kh):
    # independent resummation of the multiple-reflection series: the
    # geometric-series denominators must reproduce the image lattice
    omega = 2.0
    k = omega / HBAR_C_EV_NM
    lam = 2 * np.pi / k
    h = kh / k
    z0 = 0.37 * h
    stack = LayerStack(kind="two_surfaces", lower=PEC, upper=PEC, height_nm=h)
    gr = scattering_green(stack, [0, 0, z0], [0, 0, z0], omega)
    for tag, dhat, tol in (("perp", np.array([0, 0, 1.0]), 1e-8),
                           ("par", np.array([1.0, 0, 0]), 1e-5)):
        direct = 1.0 + 3.0 * lam * float(np.imag(dhat @ gr @ dhat))
        want = _mirror_lattice_rate(tag, k, h, z0)
        assert direct == pytest.approx(want, rel=tol)


def test_two_mirror_parallel_rate_vanishes_below_cutoff():
    # kh < pi: no radiative mode couples to an in-plane dipole, and the
    # image lattice agrees
    omega = 2.0
    k = omega / HBAR_C_EV_NM
    lam = 2 * np.pi / k
    h = 2.3 / k
    z0 = 0.37 * h
    stack = LayerStack(kind="two_surfaces", lower=PEC, upper=PEC, height_nm=h)
    gr = scattering_green(stack, [0, 0, z0], [0, 0, z0], omega)
    direct = 1.0 + 3.0 * lam * float(np.imag(gr[0, 0]))
    assert abs(direct) < 1e-5
    assert abs(_mirror_lattice_rate("par", k, h, z0)) < 1e-4


def test_printed_zy_index_breaks_reciprocity():
    """The zy component must use the "minus" mixed coefficient.

    Assembling G^R_zy with the same index as G^R_yz (as one reading of
    the component list would have it) violates reciprocity whenever the
    two atoms sit at different heights between two surfaces; the
    swapped-index version, which our rotation-covariant assembly
    produces automatically, satisfies it.
    """
    omega = 2.0
    k = omega / HBAR_C_EV_NM
    h = 300.0
    z_a, z_b = 90.0, 210.0
    rho = 140.0
    stack = LayerStack(kind="two_surfaces", lower=PEC, upper=PEC, height_nm=h)
    r_a = np.array([0.0, rho, z_a])     # separation along +y: sin(phi) = 1
    r_b = np.array([0.0, 0.0, z_b])

    def e_coeff(kr, zsum, zdif, sign):
        kz = _branch_sqrt(k**2 - kr**2)
        rp = fresnel("p", kr, omega, np.inf)
        up = np.exp(1j * kz * zsum)
        vp = np.exp(1j * kz * (2 * h - zsum))
        w2 = np.exp(2j * kz * h)
        dp = 1.0 - rp * rp * w2
        return (rp * up + rp * vp + sign * 2j * rp * rp * np.sin(kz * zdif) * w2) / dp

    def zy_component(zsum, zdif, sign):
        def f(kr):
            e = e_coeff(kr, zsum, zdif, sign)
            return 1j * kr**2 / k**2 * e * jv(1, kr * rho)
        res = sommerfeld_integrate(f, k)
        return 1j / (4 * np.pi) * res.scalar

    zsum, zdif = z_a + z_b, z_a - z_b
    zy_minus = zy_component(zsum, zdif, -1.0)   # corrected index
    zy_plus = zy_component(zsum, zdif, +1.0)    # as printed
    g_ab = scattering_green(stack, r_a, r_b, omega)
    g_ba = scattering_green(stack, r_b, r_a, omega)

    assert g_ab[2, 1] == pytest.approx(zy_minus, rel=1e-8)
    # reciprocity holds for the corrected assembly ...
    assert abs(g_ab[2, 1] - g_ba[1, 2]) < 1e-10 * abs(g_ab[2, 1])
    # ... and fails decisively for the printed index choice
    assert abs(zy_plus - g_ba[1, 2]) > 1e3 * abs(g_ab[2, 1] - g_ba[1, 2])
    assert abs(zy_plus - zy_minus) > 1e-6 * abs(zy_minus)
