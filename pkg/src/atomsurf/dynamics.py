"""Single-excitation dynamics of a dissipative dipole-coupled array.

Starting from one excited atom, every collective jump operator maps the
single-excitation sector straight to the global ground state, so the
populations n_i(t) of the full master equation are reproduced exactly
by the N-dimensional non-Hermitian evolution

    dc/dt = K c,    K = i V - Gamma / 2

with time measured in 1/gamma.  The 2^N density matrix is never
materialized; tests check the equivalence against a brute-force
integration for small N.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .couplings import CouplingSet

logger = logging.getLogger(__name__)


@dataclass
class EffectiveHamiltonian:
    """Generator K of the single-excitation sector (rates in gamma)."""

    k: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k, dtype=complex)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise ValueError("K must be square")
        self.k = k
        # dissipation may only remove norm: -(K + K^dag)/2 = Gamma/2 >= 0
        herm = -0.5 * (k + k.conj().T)
        min_eig = float(np.linalg.eigvalsh(herm).min())
        scale = max(1.0, float(np.abs(herm).max()))
        if min_eig < -1e-8 * scale:
            raise ValueError(
                f"K gains norm: min eig of -(K+K^dag)/2 is {min_eig}")


def build_effective_hamiltonian(cs: CouplingSet) -> EffectiveHamiltonian:
    """K = i V - Gamma/2 from an assembled coupling set."""
    return EffectiveHamiltonian(1j * cs.v - 0.5 * cs.gamma)


@dataclass
class Trajectory:
    """Amplitudes on a uniform time grid (time in 1/gamma)."""

    times: np.ndarray             # (T,)
    amplitudes: np.ndarray        # (T, N) complex

    @property
    def populations(self) -> np.ndarray:
        """n_i(t), shape (T, N)."""
        return np.abs(self.amplitudes) ** 2

    @property
    def total(self) -> np.ndarray:
        """n(t) = sum_i n_i(t)."""
        return self.populations.sum(axis=1)


def propagate(k_matrix, c0, t_max: float, dt_out: float) -> Trajectory:
    """Evolve dc/dt = K c and sample on a uniform grid.

    Uses the eigendecomposition of K (numerically exact for
    diagonalizable K); if K is defective within tolerance the solver
    falls back to adaptive stepping at 1e-9 local accuracy and logs it.
    """
    k = k_matrix.k if isinstance(k_matrix, EffectiveHamiltonian) else \
        np.asarray(k_matrix, dtype=complex)
    c0 = np.asarray(c0, dtype=complex)
    if np.linalg.norm(c0) > 1.0 + 1e-9:
        raise ValueError("initial amplitudes must satisfy |c0| <= 1")
    if t_max <= 0.0 or dt_out <= 0.0:
        raise ValueError("t_max and dt_out must be positive")
    times = np.arange(0.0, t_max + 0.5 * dt_out, dt_out)

    vals, vecs = np.linalg.eig(k)
    ok = False
    try:
        coeff = np.linalg.solve(vecs, c0)
        resid = np.linalg.norm(vecs @ np.diag(vals) @ np.linalg.inv(vecs) - k)
        ok = resid <= 1e-10 * max(1.0, np.linalg.norm(k))
    except np.linalg.LinAlgError:
        ok = False
    if ok:
        phases = np.exp(np.outer(times, vals))
        amps = phases * coeff[None, :] @ vecs.T
        return Trajectory(times=times, amplitudes=amps)

    logger.warning("K defective within tolerance; falling back to adaptive stepping")
    sol = solve_ivp(lambda _t, c: k @ c, (0.0, times[-1]), c0,
                    t_eval=times, method="DOP853", rtol=1e-9, atol=1e-12)
    if not sol.success:
        raise RuntimeError(f"adaptive propagation failed: {sol.message}")
    return Trajectory(times=times, amplitudes=sol.y.T)


class WindowTooShortError(RuntimeError):
    """The rightmost-site population is still rising at the end of the run."""


@dataclass
class TransportMetrics:
    """Arrival-time observables of the rightmost site."""

    t_peak: float                 # units 1/gamma
    peak_population: float        # n_N(t_peak)
    remaining_fraction: float     # n(t_peak) / n(0)


def transport_metrics(traj: Trajectory) -> TransportMetrics:
    """Peak time of the last site, refined by quadratic interpolation.

    Raises WindowTooShortError when the discrete maximum falls on the
    final grid point, i.e. the excitation has not arrived yet.
    """
    n_last = traj.populations[:, -1]
    idx = int(np.argmax(n_last))
    if idx == len(n_last) - 1 and len(n_last) > 1:
        raise WindowTooShortError(
            "n_N(t) peaks on the final grid point; rerun with larger t_max")
    t = traj.times
    if 0 < idx < len(n_last) - 1:
        ym, y0, yp = n_last[idx - 1], n_last[idx], n_last[idx + 1]
        denom = ym - 2.0 * y0 + yp
        shift = 0.0 if denom == 0.0 else 0.5 * (ym - yp) / denom
        dt = t[1] - t[0]
        t_peak = t[idx] + shift * dt
        peak = y0 - 0.25 * (ym - yp) * shift
    else:
        t_peak = t[idx]
        peak = n_last[idx]
    total = traj.total
    return TransportMetrics(t_peak=float(t_peak), peak_population=float(peak),
                            remaining_fraction=float(total[idx] / total[0]))
