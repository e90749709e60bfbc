"""Analytic evolution of the driven lattice: displacement operator and its ingredients.

The driven chain with kappa_n = rho*sqrt(n) is the Fock-space picture of a
linearly driven bosonic mode, so its gauge-frame propagator is a displacement
operator times a global phase:

    b(t) = exp(i phi(t)) * D(beta(t)) b(0),
    beta(t) = i * conj(sigma(t)),
    phi(t)  = + int_0^t Im{ sigma(t') * conj(rho(t')) } dt',   rho(t) = rho e^{-i Phi(t)}.

(The signs above are fixed by matching the full complex amplitudes of a direct
integration of the lattice equations; see tests.)

Matrix elements of D are evaluated in the log domain with associated Laguerre
polynomials, so they stay finite for indices up to several hundred. The Bessel
and Laguerre evaluations are written out here rather than delegated, because
independent quadrature/symbolic oracles in the test suite check them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import DriveWaveform, Frame, LatticeState, _sigma_phi

__all__ = [
    "DisplacementPropagator",
    "HeadroomError",
    "bessel_j",
    "laguerre_assoc",
    "log_factorial",
    "displacement_matrix_element",
    "displacement_column",
    "sigma_and_phase",
    "exact_state",
]


class HeadroomError(ValueError):
    """Initial support too close to the truncation edge for the analytic sum."""


def log_factorial(n: int) -> float:
    """ln(n!) via lgamma; never forms n! itself."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.lgamma(n + 1.0)


def bessel_j(k: int, x: float) -> float:
    """Bessel function J_k(x) for integer k >= 0, |x| <= 1e4, abs error <~ 1e-12.

    Ascending series for small |x|; backward (Miller) recurrence normalized by
    J_0 + 2*sum J_{2m} = 1 for large |x|.
    """
    if k < 0:
        raise ValueError("order k must be >= 0")
    if abs(x) > 1e4:
        raise ValueError("|x| must be <= 1e4")
    if x == 0.0:
        return 1.0 if k == 0 else 0.0
    sign = 1.0
    if x < 0.0:
        x = -x
        sign = -1.0 if k % 2 else 1.0

    if x <= 10.0:
        # alternating series; terms recur by ratio, first term in log domain
        half = 0.5 * x
        term = math.exp(k * math.log(half) - log_factorial(k))
        total = term
        h2 = half * half
        for m in range(1, 400):
            term *= -h2 / (m * (k + m))
            total += term
            if abs(term) <= 1e-17 * (1.0 + abs(total)):
                break
        return sign * total

    # Miller's downward recurrence with even-term sum normalization
    start = k + int(1.2 * x + 36.0 * x ** (1.0 / 3.0)) + 20
    if start % 2:
        start += 1
    jp, j = 0.0, 1e-30
    norm = 0.0
    target = 0.0
    for m in range(start, 0, -1):
        jm = (2.0 * m / x) * j - jp
        jp, j = j, jm
        if abs(j) > 1e250:  # rescale to dodge overflow
            j *= 1e-250
            jp *= 1e-250
            norm *= 1e-250
            target *= 1e-250
        if m - 1 == k:
            target = j
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2.0 * j
    norm += j  # j has descended to J_0; norm = J_0 + 2*sum_{even m>=2} J_m = 1
    return sign * target / norm


def laguerre_assoc(m: int, k: int, x: float) -> float:
    """Associated Laguerre L_m^{(k)}(x) by the stable three-term recurrence in m."""
    if m < 0 or k < 0:
        raise ValueError("degree and superscript must be >= 0")
    if m == 0:
        return 1.0
    prev = 1.0
    cur = 1.0 + k - x
    for j in range(1, m):
        prev, cur = cur, ((2 * j + k + 1 - x) * cur - (j + k) * prev) / (j + 1)
    return cur


def displacement_matrix_element(n: int, m: int, beta: complex) -> complex:
    """<n| exp(beta a^+ - beta* a) |m>, finite for n, m up to ~400.

    For n >= m:  sqrt(m!/n!) beta^(n-m) e^{-|beta|^2/2} L_m^{(n-m)}(|beta|^2),
    and the mirrored formula with (-beta*) for n < m. Factorial ratios and
    powers are combined in the log domain; only the sign/phase is carried
    separately.
    """
    if n < 0 or m < 0:
        raise ValueError("Fock indices must be >= 0")
    if beta == 0:
        return 1.0 + 0.0j if n == m else 0.0 + 0.0j
    p, q = (m, n) if n >= m else (n, m)
    d = q - p
    b2 = abs(beta) ** 2
    lag = laguerre_assoc(p, d, b2)
    log_mag = 0.5 * (log_factorial(p) - log_factorial(q)) - 0.5 * b2
    if d:
        log_mag += d * math.log(abs(beta))
    if lag != 0.0:
        log_mag += math.log(abs(lag))
        lag_sign = 1.0 if lag > 0 else -1.0
    else:
        return 0.0 + 0.0j
    arg = cmath.phase(beta) if n >= m else cmath.phase(-beta.conjugate())
    return lag_sign * math.exp(log_mag) * cmath.exp(1j * d * arg)


def displacement_column(m: int, beta: complex, n_max: int) -> np.ndarray:
    """Column <n|D(beta)|m> for n = 0..n_max."""
    return np.array(
        [displacement_matrix_element(n, m, beta) for n in range(n_max + 1)], dtype=complex
    )


@dataclass(frozen=True)
class DisplacementPropagator:
    """Exact one-body propagator data at time t: U = e^{i phi} D(beta)."""

    beta: complex
    phi_global: float
    t: float

    @property
    def sigma(self) -> complex:
        # beta = i conj(sigma)  =>  sigma = i conj(beta)
        return 1j * self.beta.conjugate()


def sigma_and_phase(drive: DriveWaveform, rho: complex, t: float) -> DisplacementPropagator:
    """Evaluate sigma(t), beta(t) = i sigma*(t), and the accumulated global phase."""
    if t < 0:
        raise ValueError("t must be >= 0")
    sig, phi = _sigma_phi(drive, rho, t, want_phi=True)
    return DisplacementPropagator(beta=1j * sig.conjugate(), phi_global=phi, t=t)


def exact_state(initial: LatticeState, drive: DriveWaveform, rho: complex,
                t: float, *, headroom: int = 20, source_tol: float = 1e-14) -> LatticeState:
    """Evolve a t=0 gauge-frame state analytically to time t.

    b_n(t) = e^{i phi} sum_m <n|D(beta)|m> b_m(0); sources below `source_tol`
    in modulus are dropped. The initial support must sit at least `headroom`
    sites below the truncation edge so the analytic (untruncated) sum remains
    faithful on the stored window. Composing the result with gauge_transform
    yields the lab-frame amplitudes.
    """
    if initial.t != 0.0:
        raise ValueError("analytic evolution starts from t = 0")
    N = initial.site_count
    occupied = np.nonzero(np.abs(initial.amplitudes) > source_tol)[0]
    if occupied.size == 0:
        raise ValueError("initial state is empty")
    if occupied[-1] > N - headroom:
        raise HeadroomError(
            f"initial support reaches site {occupied[-1]}; needs <= {N - headroom} "
            f"(headroom {headroom}) for a faithful truncated window"
        )
    prop = sigma_and_phase(drive, rho, t)
    out = np.zeros(N + 1, dtype=complex)
    for m in occupied:
        out += initial.amplitudes[m] * displacement_column(int(m), prop.beta, N)
    out *= cmath.exp(1j * prop.phi_global)
    return LatticeState(out, t, Frame.GAUGE)
