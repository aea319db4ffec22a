"""Coupling-matrix assembly, collective modes and the surface shift."""

import numpy as np
import pytest

from atomsurf.constants import SR_GAMMA_EV, SR_OMEGA_EV
from atomsurf.couplings import (AtomArray, chain_array, collective_modes,
                                coupling_matrices, pair_array, surface_shift)
from atomsurf.greens import (LayerStack, bulk_green, scattering_green,
                             vacuum_coupling)
from atomsurf.materials import PerfectConductor, load_material_db

DB = load_material_db()
VACUUM = LayerStack()
AG_SURFACE = LayerStack(kind="one_surface", lower=DB.get("Ag"))


def test_atom_array_invariants():
    with pytest.raises(ValueError, match="unit vector"):
        AtomArray(np.array([[0, 0, 0], [100, 0, 0]]), np.array([1.0, 1.0, 0]), 1.0)
    with pytest.raises(ValueError, match="distinct"):
        AtomArray(np.array([[0, 0, 5.0], [0, 0, 5.0]]), np.array([1.0, 0, 0]), 1.0)
    with pytest.raises(ValueError):
        AtomArray(np.array([[0, 0, 5.0]]), np.array([1.0, 0, 0]), -2.0)


def test_vacuum_diagonal_is_gamma_and_offdiagonals_are_closed_forms():
    arr = chain_array(4, 180.0, 0.0, "parallel-perp-axis", 2.2)
    cs = coupling_matrices(arr, VACUUM)
    assert np.allclose(np.diag(cs.gamma), 1.0, atol=1e-14)
    assert np.all(np.diag(cs.v) == 0.0)
    lam = arr.wavelength_nm
    for i in range(4):
        for j in range(i + 1, 4):
            rij = arr.positions_nm[i] - arr.positions_nm[j]
            v0, g0 = vacuum_coupling(rij, arr.dipole, lam)
            assert cs.v[i, j] == pytest.approx(v0, rel=1e-12)
            assert cs.gamma[i, j] == pytest.approx(g0, rel=1e-12)


def test_vacuum_matrix_matches_tensor_contraction():
    # two independent code paths: closed forms vs bulk tensor projection
    arr = pair_array(260.0, 0.0, "aligned-with-axis", 1.7)
    cs = coupling_matrices(arr, VACUUM)
    k = arr.k_nm
    lam = arr.wavelength_nm
    g = bulk_green(arr.positions_nm[0] - arr.positions_nm[1], k)
    d = arr.dipole
    assert cs.v[0, 1] == pytest.approx(1.5 * lam * float(d @ g.real @ d), rel=1e-9)
    assert cs.gamma[0, 1] == pytest.approx(3.0 * lam * float(d @ g.imag @ d), rel=1e-9)


def test_far_field_falloff_bound():
    # kappa = 100 pi: |Gamma_12| is bounded by the 3/(2 kappa) envelope
    omega = 2.0
    lam = 2 * np.pi * 197.3269804 / omega
    kappa = 100 * np.pi
    arr = pair_array(kappa * lam / (2 * np.pi), 0.0, "parallel-perp-axis", omega)
    cs = coupling_matrices(arr, VACUUM)
    assert abs(cs.gamma[0, 1]) < 0.005


@pytest.mark.parametrize("stack", [
    AG_SURFACE,
    LayerStack(kind="two_surfaces", lower=DB.get("Ag"), upper=DB.get("Ag"),
               height_nm=250.0),
])
def test_symmetry_and_psd_near_surfaces(stack):
    arr = chain_array(5, 140.0, 90.0, "aligned-with-axis", 3.1)
    cs = coupling_matrices(arr, stack)
    assert np.allclose(cs.v, cs.v.T, rtol=1e-9)
    assert np.allclose(cs.gamma, cs.gamma.T, rtol=1e-9)
    evals = np.linalg.eigvalsh(cs.gamma)
    assert evals.min() >= -1e-8 * evals.max()
    assert np.sum(cs.mode_rates) == pytest.approx(np.trace(cs.gamma), rel=1e-12)


def test_translation_and_joint_rotation_invariance():
    omega = 2.6
    d = np.array([1.0, 0.0, 0.0])
    base = AtomArray(np.array([[0, 0, 60.0], [190.0, 0, 60.0]]), d, omega)
    cs0 = coupling_matrices(base, AG_SURFACE)
    # in-plane translation
    shifted = AtomArray(base.positions_nm + np.array([310.0, -75.0, 0.0]), d, omega)
    cs1 = coupling_matrices(shifted, AG_SURFACE)
    assert np.allclose(cs1.v, cs0.v, atol=1e-10)
    assert np.allclose(cs1.gamma, cs0.gamma, atol=1e-10)
    # rotating separation and dipole together about z
    ang = 0.83
    rot = np.array([[np.cos(ang), -np.sin(ang), 0],
                    [np.sin(ang), np.cos(ang), 0], [0, 0, 1.0]])
    rotated = AtomArray(base.positions_nm @ rot.T, rot @ d, omega)
    cs2 = coupling_matrices(rotated, AG_SURFACE)
    assert np.allclose(cs2.v, cs0.v, atol=1e-10)
    assert np.allclose(cs2.gamma, cs0.gamma, atol=1e-10)


def test_memoization_matches_direct_evaluation():
    arr = chain_array(6, 206.4, 100.0, "aligned-with-axis", SR_OMEGA_EV)
    cs = coupling_matrices(arr, AG_SURFACE)
    lam = arr.wavelength_nm
    i, j = 1, 4
    gr = scattering_green(AG_SURFACE, arr.positions_nm[i], arr.positions_nm[j],
                          arr.omega_a_ev)
    v0, g0 = vacuum_coupling(arr.positions_nm[i] - arr.positions_nm[j],
                             arr.dipole, lam)
    d = arr.dipole
    assert cs.v[i, j] == pytest.approx(v0 + 1.5 * lam * float(d @ gr.real @ d),
                                       rel=1e-10)
    assert cs.gamma[i, j] == pytest.approx(g0 + 3.0 * lam * float(d @ gr.imag @ d),
                                           rel=1e-10)


def test_silver_parallel_rate_suppressed_at_low_frequency():
    # omega ~ 0.1 wp: rate for an in-plane dipole drops well below gamma
    # (z >= 25 nm; at 10 nm the bundled fit's IR loss quenches into the metal)
    omega = 0.1 * 9.01
    for z, bound in ((25.0, 0.5), (50.0, 0.3), (100.0, 0.5)):
        arr = chain_array(1, 1.0, z, "parallel-perp-axis", omega)
        cs = coupling_matrices(arr, AG_SURFACE)
        assert cs.gamma[0, 0] < bound
    arr = chain_array(1, 1.0, 50.0, "perpendicular-to-surface", omega)
    assert coupling_matrices(arr, AG_SURFACE).gamma[0, 0] > 1.0


def test_collective_modes_two_atoms():
    g = np.array([[1.0, 0.4], [0.4, 1.0]])
    rates, modes = collective_modes(g)
    assert rates == pytest.approx([1.4, 0.6])
    assert np.allclose(np.abs(modes), 1 / np.sqrt(2))
    assert np.all(modes[0] > 0)          # sign convention
    assert np.allclose(modes @ np.diag(rates) @ modes.T, g)


def test_collective_modes_single_atom():
    rates, modes = collective_modes(np.array([[0.73]]))
    assert rates[0] == pytest.approx(0.73)
    assert modes[0, 0] == 1.0


def test_chain_has_strongly_subradiant_modes():
    # a/lambda ~ 0.08: the 20-site chain supports near-dark modes
    arr = chain_array(20, 206.4, 0.0, "aligned-with-axis", SR_OMEGA_EV)
    cs = coupling_matrices(arr, VACUUM)
    assert cs.mode_rates.min() < 0.1
    assert cs.mode_rates.max() > 1.5


def test_collective_modes_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        collective_modes(np.array([[1.0, 0.2], [0.1, 1.0]]))


def test_atom_outside_stack_rejected():
    arr = chain_array(2, 100.0, -20.0, "aligned-with-axis", 2.0)
    with pytest.raises(ValueError, match="outside the vacuum layer"):
        coupling_matrices(arr, AG_SURFACE)


def test_surface_shift_vacuum_is_zero_after_one_iteration():
    res = surface_shift(VACUUM, [0, 0, 50.0], [0, 0, 1], 2.0, 1e-9)
    assert res.delta_ev == 0.0
    assert res.converged
    assert res.iterations == 1


def test_surface_shift_small_and_monotonic():
    stack = AG_SURFACE
    shifts = {}
    for z in (10.0, 100.0):
        res = surface_shift(stack, [0, 0, z], [0, 0, 1], SR_OMEGA_EV,
                            SR_GAMMA_EV)
        assert res.converged
        assert abs(res.delta_ev) / SR_OMEGA_EV < 1e-3
        assert abs(res.omega_shifted_ev - (SR_OMEGA_EV - res.delta_ev)) < 1e-12
        shifts[z] = abs(res.delta_ev)
    assert shifts[100.0] < shifts[10.0]


def test_surface_shift_perfect_mirror_sign():
    # in front of a mirror the perpendicular near-field shift is attractive
    res = surface_shift(LayerStack(kind="one_surface", lower=PerfectConductor()),
                        [0, 0, 15.0], [0, 0, 1], SR_OMEGA_EV, SR_GAMMA_EV)
    assert res.converged
    assert res.delta_ev != 0.0
