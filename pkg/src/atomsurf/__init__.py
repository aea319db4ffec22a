"""Dipole-dipole couplings, collective decay and excitation transport
for two-level atom arrays near planar layered media."""

from .constants import HBAR_C_EV_NM, SR_GAMMA_EV, SR_OMEGA_EV, SR_WAVELENGTH_NM
from .couplings import (AtomArray, CouplingSet, ShiftResult, chain_array,
                        collective_modes, coupling_matrices, orientation_vector,
                        pair_array, surface_shift)
from .dynamics import (EffectiveHamiltonian, Trajectory, TransportMetrics,
                       WindowTooShortError, build_effective_hamiltonian,
                       propagate, transport_metrics)
from .greens import (LayerStack, WaveGeometry, bulk_green,
                     bulk_green_imag_coincident, fresnel, scattering_green,
                     vacuum_coupling, vacuum_coupling_general)
from .materials import (DrudeLorentzParams, DrudeParams, MaterialDB,
                        ModifiedLorentzParams, PerfectConductor, epsilon,
                        eval_drude, eval_drude_lorentz, eval_modified_lorentz,
                        load_material_db)
from .sommerfeld import ConvergenceError, PathParams, sommerfeld_integrate

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
