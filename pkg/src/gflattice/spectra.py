"""Floquet monodromy, quasienergies and static-force (Wannier-Stark) spectra.

The one-period propagator is built by evolving the identity column-by-column
(as one matrix) with the same Cayley-stage integrator used for trajectories,
in the gauge frame for accuracy, then rephased to the lab frame at t = T.
Quasienergies are the folded eigenphases; "converged" levels are those whose
quasienergy is reproduced when the truncation is enlarged by ten sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import DriveWaveform, HoppingProfile
from .propagate import _advance

__all__ = [
    "MonodromyMatrix",
    "QuasienergySpectrum",
    "NonUnitaryError",
    "monodromy",
    "quasienergies",
    "quasienergy_spectrum",
    "circular_spread",
    "stark_spectrum",
    "stark_converged",
]

CONVERGENCE_TOL = 1e-8  # fraction of omega (or of ||H||) for the converged flag


class NonUnitaryError(RuntimeError):
    pass


@dataclass(frozen=True)
class MonodromyMatrix:
    """One-period propagator U(T) on the truncated chain."""

    matrix: np.ndarray
    period: float
    profile: HoppingProfile
    drive: DriveWaveform
    steps: int

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.period

    def unitarity_defect(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def monodromy(profile: HoppingProfile, drive: DriveWaveform, site_count: int | None = None,
              *, steps_per_period: int = 4000, stages: int = 2) -> MonodromyMatrix:
    """Propagate the identity over one drive period.

    Integrates in the gauge frame (no stiff tilt diagonal) and applies the
    exact rephasing diag(e^{-i n Phi(T)}) at the end, which is the identity for
    zero-mean drives. dt = T/steps_per_period; the default satisfies dt <= T/4000.
    """
    T = drive.period
    if T is None:
        raise ValueError("monodromy requires a periodic drive")
    N = profile.site_count if site_count is None else site_count
    prof = replace(profile, site_count=N)
    kap = prof.coupling_array()
    dt = T / steps_per_period
    U = np.eye(N + 1, dtype=complex)
    zeros = np.zeros(N + 1)
    for k in range(steps_per_period):
        tm = (k + 0.5) * dt
        coupling = -kap * np.exp(-1j * drive.phase_integral(tm))
        U = _advance(coupling, zeros, U, dt, stages)
    phi_T = drive.phase_integral(T)
    if phi_T != 0.0:
        U = np.exp(-1j * np.arange(N + 1) * phi_T)[:, None] * U
    return MonodromyMatrix(U, T, prof, drive, steps_per_period)


@dataclass(frozen=True)
class QuasienergySpectrum:
    """Folded eigenphases of U(T), sorted ascending; optional convergence flags."""

    values: np.ndarray  # quasienergies in (-omega/2, omega/2]
    omega: float
    period: float
    converged: np.ndarray | None = None

    def __len__(self) -> int:
        return self.values.size

    def with_convergence(self, larger: "QuasienergySpectrum",
                         tol: float = CONVERGENCE_TOL) -> "QuasienergySpectrum":
        """Flag levels reproduced (mod omega) in a larger-truncation spectrum."""
        d = _circular_distance_matrix(self.values, larger.values, self.omega).min(axis=1)
        return replace(self, converged=d <= tol * self.omega)

    def spread(self, converged_only: bool = True) -> float:
        """Circular diameter of the quasienergy set (0 for a single level)."""
        vals = self.values
        if converged_only:
            if self.converged is None:
                raise ValueError("convergence flags not computed")
            vals = self.values[self.converged]
        return circular_spread(vals, self.omega)


def _fold(eps: np.ndarray, omega: float) -> np.ndarray:
    folded = np.mod(eps + omega / 2.0, omega) - omega / 2.0
    return np.where(folded == -omega / 2.0, omega / 2.0, folded)


def _circular_distance_matrix(a: np.ndarray, b: np.ndarray, omega: float) -> np.ndarray:
    d = np.mod(np.abs(a[:, None] - b[None, :]), omega)
    return np.minimum(d, omega - d)


def circular_spread(values: np.ndarray, omega: float) -> float:
    """Diameter of a set of quasienergies on the circle of circumference omega."""
    if values.size <= 1:
        return 0.0
    th = np.sort(np.mod(values, omega))
    gaps = np.diff(np.concatenate([th, [th[0] + omega]]))
    return float(omega - gaps.max())


def quasienergies(mono: MonodromyMatrix, *, unitarity_tol: float = 1e-6,
                  residual_tol: float = 1e-8) -> QuasienergySpectrum:
    """Eigen-decompose U(T) and fold the eigenphases into (-omega/2, omega/2].

    Raises NonUnitaryError if U fails the unitarity check, and asserts the
    eigenpair residuals ||U v - lambda v|| <= residual_tol (U is normal, so the
    dense solver delivers residuals at round-off level).
    """
    defect = mono.unitarity_defect()
    if defect > unitarity_tol:
        raise NonUnitaryError(f"monodromy unitarity defect {defect:.2e} > {unitarity_tol:g}")
    lam, vec = np.linalg.eig(mono.matrix)
    resid = np.linalg.norm(mono.matrix @ vec - vec * lam[None, :], axis=0)
    worst = float(resid.max())
    if worst > residual_tol:
        raise NonUnitaryError(f"eigenpair residual {worst:.2e} > {residual_tol:g}")
    eps = _fold(-np.angle(lam) / mono.period, mono.omega)
    return QuasienergySpectrum(np.sort(eps), mono.omega, mono.period)


def quasienergy_spectrum(profile: HoppingProfile, drive: DriveWaveform,
                         site_count: int | None = None, *, steps_per_period: int = 4000,
                         stages: int = 2, flag_tol: float = CONVERGENCE_TOL) -> QuasienergySpectrum:
    """Quasienergies at the given truncation with convergence flags from N+10."""
    N = profile.site_count if site_count is None else site_count
    spec = quasienergies(monodromy(profile, drive, N,
                                   steps_per_period=steps_per_period, stages=stages))
    bigger = quasienergies(monodromy(profile, drive, N + 10,
                                     steps_per_period=steps_per_period, stages=stages))
    return spec.with_convergence(bigger, tol=flag_tol)


def stark_spectrum(profile: HoppingProfile, F0: float, site_count: int | None = None) -> np.ndarray:
    """Eigenvalues of the static tilted chain (diagonal n*F0, couplings -kappa_{n+1}).

    A constant coupling phase is a diagonal gauge and does not move eigenvalues,
    so the real-magnitude tridiagonal form is diagonalized directly.
    """
    if F0 < 0:
        raise ValueError("F0 must be >= 0")
    N = profile.site_count if site_count is None else site_count
    prof = replace(profile, site_count=N)
    diag = np.arange(N + 1) * F0
    off = -prof.hopping_array()
    if off.size == 0:
        return diag.copy()
    return eigh_tridiagonal(diag, off, eigvals_only=True)


def stark_converged(profile: HoppingProfile, F0: float, site_count: int | None = None,
                    *, tol: float = CONVERGENCE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Stark eigenvalues plus flags marking levels stable under N -> N+10."""
    N = profile.site_count if site_count is None else site_count
    vals = stark_spectrum(profile, F0, N)
    bigger = stark_spectrum(profile, F0, N + 10)
    hnorm = max(np.max(np.abs(vals)), 1e-300)
    d = np.min(np.abs(vals[:, None] - bigger[None, :]), axis=1)
    return vals, d <= tol * hnorm
