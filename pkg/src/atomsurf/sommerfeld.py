"""Adaptive integration of Sommerfeld-type integrals over a deformed path.

Semi-infinite in-plane-wavenumber integrals of layered-media optics are
evaluated along a three-piece path in the complex k_rho plane:

1. the real segment [0, k(1-w)],
2. a half-ellipse dipping into the lower half plane that spans
   [k(1-w), k(1+w)] and clears the k_rho = k branch point together with
   the guided-mode / surface-plasmon poles (which sit on or above the
   real axis for passive media),
3. the real tail [k(1+w), inf), reparametrized by q = -i k_z =
   sqrt(k_rho^2 - k^2) so that evanescent decay exp(-q s) becomes a
   plain exponential; the tail is extended panel by panel until its
   contribution is negligible.

Every piece is covered by adaptive bisection panels with an embedded
Gauss(15)/Gauss(31) pair supplying the error estimate.  The integrand
may be vector-valued (shape (npoints, m)); all components share the
evaluation budget and must converge to the requested relative
tolerance.  Failure to converge raises, never silently returns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PathParams:
    """Contour and convergence knobs for the deformed-path integration."""

    rel_tol: float = 1e-8
    ellipse_width: float = 0.5    # half-width of the ellipse, units of k
    ellipse_height: float = 0.1   # depth below the real axis, units of k
    max_evals: int = 200_000
    tail_qmax_nm: float = 50.0    # hard cap on the tail variable q (nm^-1)


class ConvergenceError(RuntimeError):
    """Raised when the evaluation budget is exhausted before the tolerance.

    Carries the best estimate achieved and its error bound so callers can
    decide whether to retry with a larger budget.
    """

    def __init__(self, msg, estimate=None, error_bound=None, neval=0):
        super().__init__(msg)
        self.estimate = estimate
        self.error_bound = error_bound
        self.neval = neval


@dataclass
class SommerfeldResult:
    value: np.ndarray      # shape (m,)
    error: np.ndarray      # shape (m,), conservative bound
    neval: int

    @property
    def scalar(self) -> complex:
        if self.value.size != 1:
            raise ValueError("result is vector-valued")
        return complex(self.value[0])


_X15, _W15 = np.polynomial.legendre.leggauss(15)
_X31, _W31 = np.polynomial.legendre.leggauss(31)


class _Panel:
    __slots__ = ("piece", "t0", "t1", "val", "err")

    def __init__(self, piece, t0, t1, val, err):
        self.piece = piece
        self.t0 = t0
        self.t1 = t1
        self.val = val
        self.err = err


def _eval_panel(f, piece, t0, t1):
    """Gauss-15/31 pair on one panel of one path piece."""
    half = 0.5 * (t1 - t0)
    mid = 0.5 * (t0 + t1)
    t = np.concatenate([mid + half * _X31, mid + half * _X15])
    z, dz = piece.map(t)
    fz = np.atleast_2d(np.asarray(f(z)))
    if fz.shape[0] != t.size:                      # f returned (m, n)
        fz = fz.T
    fz = fz * dz[:, None]
    v31 = half * (_W31[:, None] * fz[:31]).sum(axis=0)
    v15 = half * (_W15[:, None] * fz[31:]).sum(axis=0)
    return v31, np.abs(v31 - v15), t.size


class _Line:
    """Straight path z = t on the real axis."""

    def map(self, t):
        return t.astype(complex), np.ones_like(t, dtype=complex)


class _Ellipse:
    """Half-ellipse below the real axis from k(1-w) to k(1+w), t in [0, pi]."""

    def __init__(self, k, w, h):
        self.k, self.w, self.h = k, w, h

    def map(self, t):
        k, w, h = self.k, self.w, self.h
        z = k - w * k * np.cos(t) - 1j * h * k * np.sin(t)
        dz = w * k * np.sin(t) - 1j * h * k * np.cos(t)
        return z, dz


class _Tail:
    """Real tail reparametrized by q = sqrt(k_rho^2 - k^2)."""

    def __init__(self, k):
        self.k = k

    def map(self, q):
        krho = np.sqrt(self.k**2 + q**2)
        return krho.astype(complex), (q / krho).astype(complex)


def _tolerances(total_val, rel_tol):
    scale = np.abs(total_val)
    top = scale.max() if scale.size else 0.0
    # components that are structurally zero ride on the dominant scale
    return rel_tol * np.maximum(scale, 1e-2 * top)


def sommerfeld_integrate(f, k: float, path: PathParams = PathParams()) -> SommerfeldResult:
    """Integrate f(k_rho) d k_rho from 0 to infinity along the deformed path.

    Parameters
    ----------
    f : callable
        Vectorized integrand; maps a complex array of k_rho values to an
        array of shape (n,) or (n, m).  Must be analytic between the real
        axis and the path in the lower-right quadrant region spanned by
        the ellipse.
    k : float
        Free-space wavenumber locating the branch point (nm^-1).
    path : PathParams
        Contour geometry, tolerance and budget.

    Returns
    -------
    SommerfeldResult with the value vector, a conservative error bound per
    component, and the number of integrand evaluations spent.
    """
    if k <= 0.0:
        raise ValueError(f"wavenumber must be positive, got {k}")
    w = min(path.ellipse_width, 0.95)
    line = _Line()
    ellipse = _Ellipse(k, w, path.ellipse_height)
    tail = _Tail(k)
    q0 = k * np.sqrt((1.0 + w) ** 2 - 1.0)

    panels: list[_Panel] = []
    neval = 0

    def add(piece, t0, t1):
        nonlocal neval
        val, err, n = _eval_panel(f, piece, t0, t1)
        neval += n
        panels.append(_Panel(piece, t0, t1, val, err))

    # seed the head segment with several panels: adaptive bisection can
    # only refine features the embedded rule has sampled at all
    head_edges = np.linspace(0.0, k * (1.0 - w), 5)
    for a, b in zip(head_edges[:-1], head_edges[1:]):
        add(line, a, b)
    add(ellipse, 0.0, np.pi / 2)
    add(ellipse, np.pi / 2, np.pi)
    # seed the tail with two panels; more are appended on demand
    tail_step = 2.0 * k
    tail_end = q0
    for _ in range(2):
        add(tail, tail_end, tail_end + tail_step)
        tail_end += tail_step
        tail_step *= 2.0

    while True:
        total_val = np.sum([p.val for p in panels], axis=0)
        total_err = np.sum([p.err for p in panels], axis=0)
        tol = _tolerances(total_val, path.rel_tol)

        # grow the tail while its frontier still contributes (the frontier
        # is the outermost tail panel, wherever bisection left it)
        grow = False
        if tail_end < path.tail_qmax_nm:
            frontier = max((p for p in panels if p.piece is tail),
                           key=lambda p: p.t1)
            head = np.abs(frontier.val) + frontier.err
            grow = bool(np.any(head > 0.05 * np.maximum(tol, 1e-300)))
        if grow:
            add(tail, tail_end, tail_end + tail_step)
            tail_end += tail_step
            tail_step *= 2.0
        elif np.all(total_err <= np.maximum(tol, 1e-300)) or total_err.max() == 0.0:
            return SommerfeldResult(total_val, total_err, neval)
        else:
            # bisect the panel whose error dominates its tolerance
            ratios = [np.max(p.err / np.maximum(tol, 1e-300)) for p in panels]
            worst = panels.pop(int(np.argmax(ratios)))
            tm = 0.5 * (worst.t0 + worst.t1)
            if tm == worst.t0 or tm == worst.t1:
                raise ConvergenceError(
                    "panel width underflow (non-integrable feature?)",
                    estimate=total_val, error_bound=total_err, neval=neval)
            add(worst.piece, worst.t0, tm)
            add(worst.piece, tm, worst.t1)

        if neval > path.max_evals:
            total_val = np.sum([p.val for p in panels], axis=0)
            total_err = np.sum([p.err for p in panels], axis=0)
            raise ConvergenceError(
                f"tolerance {path.rel_tol:g} not reached within "
                f"{path.max_evals} integrand evaluations",
                estimate=total_val, error_bound=total_err, neval=neval)
