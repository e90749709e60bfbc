"""Lattice definitions, drive waveforms, accumulated phases and the dynamic-localization condition.

Conventions
-----------
All frequencies and rates are angular (rad/time). A lattice is a semi-infinite
chain truncated at site index N: amplitudes live on sites 0..N, and the hopping
rule kappa_n couples sites n-1 and n, with kappa_0 = 0 fixed by the boundary.
The drive enters the site energies as n*F(t); its running integral
Phi(t) = int_0^t F dt' generates the gauge transformation
c_n = b_n * exp(-i n Phi(t)) that trades the tilt for time-dependent couplings.

The central quantity for self-imaging is

    sigma(t) = rho * int_0^t exp(-i Phi(t')) dt'

whose vanishing at t = T is the dynamic-localization condition; for a
sinusoidal force it reduces to a zero of the Bessel function J0(F0/omega).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "ProfileKind",
    "DriveKind",
    "Frame",
    "GaugeDirection",
    "HoppingProfile",
    "DriveWaveform",
    "LatticeState",
    "SimulationConfig",
    "SearchError",
    "sigma",
    "dl_residual",
    "find_dl_amplitude",
    "gauge_transform",
]


class ProfileKind(str, enum.Enum):
    UNIFORM = "uniform"
    GLAUBER_FOCK = "glauber-fock"
    CUSTOM = "custom"


class DriveKind(str, enum.Enum):
    NONE = "none"
    DC = "dc"
    SINUSOIDAL = "sinusoidal"
    SQUARE = "square"
    SAMPLED = "sampled"


class Frame(str, enum.Enum):
    LAB = "lab"
    GAUGE = "gauge"


class GaugeDirection(str, enum.Enum):
    LAB_TO_GAUGE = "lab-to-gauge"
    GAUGE_TO_LAB = "gauge-to-lab"


class SearchError(RuntimeError):
    """Root bracketing exhausted its scan interval without finding the requested root."""

    def __init__(self, message: str, scanned: tuple[float, float]):
        super().__init__(f"{message} (scanned interval {scanned[0]:g}..{scanned[1]:g})")
        self.scanned = scanned


@dataclass(frozen=True)
class HoppingProfile:
    """Hopping rule n -> kappa_n on a chain truncated at site N.

    ``rho`` may be complex; magnitude tables are real and the phase of ``rho``
    is carried onto the couplings by :meth:`coupling_array`.
    """

    kind: ProfileKind
    rho: complex = 1.0
    site_count: int = 60
    custom_table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.site_count < 0:
            raise ValueError("site_count must be >= 0")
        if self.kind is ProfileKind.CUSTOM:
            if self.custom_table is None:
                raise ValueError("custom profile requires custom_table")
            table = tuple(float(v) for v in self.custom_table)
            if len(table) < self.site_count:
                raise ValueError(
                    f"custom_table has {len(table)} entries, need >= {self.site_count}"
                )
            if not all(math.isfinite(v) and v >= 0.0 for v in table):
                raise ValueError("custom_table entries must be finite and nonnegative")
            object.__setattr__(self, "custom_table", table)
        elif self.custom_table is not None:
            raise ValueError("custom_table is only valid for the custom profile kind")

    @classmethod
    def uniform(cls, rho: complex = 1.0, site_count: int = 60) -> "HoppingProfile":
        return cls(ProfileKind.UNIFORM, rho, site_count)

    @classmethod
    def glauber_fock(cls, rho: complex = 1.0, site_count: int = 60) -> "HoppingProfile":
        return cls(ProfileKind.GLAUBER_FOCK, rho, site_count)

    @classmethod
    def custom(cls, table, rho: complex = 1.0, site_count: int | None = None) -> "HoppingProfile":
        table = tuple(float(v) for v in table)
        n = len(table) if site_count is None else site_count
        return cls(ProfileKind.CUSTOM, rho, n, table)

    def hopping(self, n: int) -> float:
        """kappa_n magnitude; kappa_0 = 0 always."""
        if not 0 <= n <= self.site_count:
            raise IndexError(f"site index {n} outside 0..{self.site_count}")
        if n == 0:
            return 0.0
        if self.kind is ProfileKind.GLAUBER_FOCK:
            return abs(self.rho) * math.sqrt(n)
        if self.kind is ProfileKind.UNIFORM:
            return abs(self.rho)
        return self.custom_table[n - 1]

    def hopping_array(self) -> np.ndarray:
        """Magnitudes [kappa_1, ..., kappa_N] (length N)."""
        n = np.arange(1, self.site_count + 1)
        if self.kind is ProfileKind.GLAUBER_FOCK:
            return abs(self.rho) * np.sqrt(n)
        if self.kind is ProfileKind.UNIFORM:
            return abs(self.rho) * np.ones(self.site_count)
        return np.asarray(self.custom_table[: self.site_count], dtype=float)

    def coupling_array(self) -> np.ndarray:
        """Complex couplings kappa_n * exp(i arg rho) for n = 1..N."""
        phase = cmath.exp(1j * cmath.phase(self.rho)) if self.rho != 0 else 1.0
        return self.hopping_array().astype(complex) * phase


@dataclass(frozen=True)
class DriveWaveform:
    """External force F(t) with optional period.

    ``t0`` shifts the time origin: F(t) = base(t + t0), and the accumulated
    phase is re-anchored so Phi(0) = 0 still holds.
    """

    kind: DriveKind
    F0: float = 0.0
    omega: float | None = None
    samples: tuple[float, ...] | None = None
    sample_period: float | None = None
    t0: float = 0.0
    # cumulative trapezoid of the sample table at knot times, computed lazily
    _knot_cumint: tuple[float, ...] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind in (DriveKind.SINUSOIDAL, DriveKind.SQUARE):
            if self.omega is None or self.omega <= 0:
                raise ValueError(f"{self.kind.value} drive requires omega > 0")
        if self.kind is DriveKind.SAMPLED:
            if self.samples is None or len(self.samples) < 2:
                raise ValueError("sampled drive requires >= 2 samples")
            if self.sample_period is None or self.sample_period <= 0:
                raise ValueError("sampled drive requires sample_period > 0")
            table = tuple(float(v) for v in self.samples)
            if not all(math.isfinite(v) for v in table):
                raise ValueError("sample values must be finite")
            object.__setattr__(self, "samples", table)
            m = len(table)
            dt = self.sample_period / m
            # knot j holds int_0^{j dt} of the periodic linear interpolant;
            # interpolation wraps samples[m-1] -> samples[0]
            cum = [0.0]
            for j in range(m):
                f0, f1 = table[j], table[(j + 1) % m]
                cum.append(cum[-1] + 0.5 * (f0 + f1) * dt)
            object.__setattr__(self, "_knot_cumint", tuple(cum))

    @classmethod
    def none(cls) -> "DriveWaveform":
        return cls(DriveKind.NONE)

    @classmethod
    def dc(cls, F0: float) -> "DriveWaveform":
        return cls(DriveKind.DC, F0=F0)

    @classmethod
    def sinusoidal(cls, F0: float, omega: float, t0: float = 0.0) -> "DriveWaveform":
        return cls(DriveKind.SINUSOIDAL, F0=F0, omega=omega, t0=t0)

    @classmethod
    def square(cls, F0: float, omega: float, t0: float = 0.0) -> "DriveWaveform":
        return cls(DriveKind.SQUARE, F0=F0, omega=omega, t0=t0)

    @classmethod
    def sampled(cls, samples, period: float, t0: float = 0.0) -> "DriveWaveform":
        return cls(DriveKind.SAMPLED, samples=tuple(samples), sample_period=period, t0=t0)

    @property
    def period(self) -> float | None:
        """Drive period T, or None for aperiodic kinds (a zero drive has no intrinsic period)."""
        if self.kind in (DriveKind.SINUSOIDAL, DriveKind.SQUARE):
            return 2.0 * math.pi / self.omega
        if self.kind is DriveKind.SAMPLED:
            return self.sample_period
        return None

    def force(self, t):
        """F(t); accepts scalars or arrays."""
        t = np.asarray(t, dtype=float) + self.t0
        if self.kind is DriveKind.NONE:
            out = np.zeros_like(t)
        elif self.kind is DriveKind.DC:
            out = np.full_like(t, self.F0)
        elif self.kind is DriveKind.SINUSOIDAL:
            out = self.F0 * np.cos(self.omega * t)
        elif self.kind is DriveKind.SQUARE:
            tau = np.mod(t, 2.0 * math.pi / self.omega)
            out = np.where(tau < math.pi / self.omega, self.F0, -self.F0)
        else:
            m = len(self.samples)
            dt = self.sample_period / m
            tau = np.mod(t, self.sample_period)
            j = np.minimum((tau / dt).astype(int), m - 1)
            frac = tau / dt - j
            table = np.asarray(self.samples)
            out = table[j] * (1.0 - frac) + table[(j + 1) % m] * frac
        return out if out.ndim else float(out)

    def phase_integral(self, t):
        """Phi(t) = int_0^t F dt', exact for every kind; accepts scalars or arrays."""
        scalar = np.ndim(t) == 0
        tt = np.asarray(t, dtype=float)
        out = self._phase_base(tt + self.t0) - self._phase_base(np.asarray(self.t0))
        return float(out) if scalar else out

    def _phase_base(self, t: np.ndarray) -> np.ndarray:
        if self.kind is DriveKind.NONE:
            return np.zeros_like(t)
        if self.kind is DriveKind.DC:
            return self.F0 * t
        if self.kind is DriveKind.SINUSOIDAL:
            return (self.F0 / self.omega) * np.sin(self.omega * t)
        if self.kind is DriveKind.SQUARE:
            T = 2.0 * math.pi / self.omega
            tau = np.mod(t, T)
            half = T / 2.0
            # triangle wave: one period integrates to zero
            return np.where(tau <= half, self.F0 * tau, self.F0 * (T - tau))
        m = len(self.samples)
        T = self.sample_period
        dt = T / m
        cum = np.asarray(self._knot_cumint)
        periods = np.floor(t / T)
        tau = t - periods * T
        j = np.minimum((tau / dt).astype(int), m - 1)
        u = tau - j * dt
        table = np.asarray(self.samples)
        f0 = table[j]
        f1 = table[(np.asarray(j) + 1) % m]
        slope = (f1 - f0) / dt
        return periods * cum[m] + cum[j] + f0 * u + 0.5 * slope * u * u

    def smoothness_knots(self, a: float, b: float) -> list[float]:
        """Interior times in (a, b) where F (hence exp(-i Phi)) loses smoothness."""
        if self.kind is DriveKind.SQUARE:
            seg = math.pi / self.omega
        elif self.kind is DriveKind.SAMPLED:
            seg = self.sample_period / len(self.samples)
        else:
            return []
        # knots sit where (t + t0) is a multiple of seg
        k0 = math.floor((a + self.t0) / seg) + 1
        knots = []
        k = k0
        while True:
            t = k * seg - self.t0
            if t >= b - 1e-15 * max(1.0, abs(b)):
                break
            if t > a + 1e-15 * max(1.0, abs(a)):
                knots.append(t)
            k += 1
        return knots


@dataclass
class LatticeState:
    """Complex amplitudes on sites 0..N at time t, tagged with its frame."""

    amplitudes: np.ndarray
    t: float = 0.0
    frame: Frame = Frame.LAB

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 1 or self.amplitudes.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-D vector")

    @classmethod
    def single_site(cls, n: int, site_count: int, frame: Frame = Frame.LAB) -> "LatticeState":
        if not 0 <= n <= site_count:
            raise ValueError(f"initial site {n} outside 0..{site_count}")
        amp = np.zeros(site_count + 1, dtype=complex)
        amp[n] = 1.0
        return cls(amp, 0.0, frame)

    @classmethod
    def from_vector(cls, vec, frame: Frame = Frame.LAB) -> "LatticeState":
        """Normalizes on ingestion."""
        amp = np.asarray(vec, dtype=complex)
        nrm = np.linalg.norm(amp)
        if nrm == 0:
            raise ValueError("initial vector must be nonzero")
        return cls(amp / nrm, 0.0, frame)

    @property
    def site_count(self) -> int:
        return self.amplitudes.size - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def occupations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> "LatticeState":
        return LatticeState(self.amplitudes.copy(), self.t, self.frame)


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to run one time evolution."""

    profile: HoppingProfile
    drive: DriveWaveform
    initial: "int | np.ndarray | LatticeState" = 0
    dt: float | None = None
    t_end: float = 0.0
    record_stride: int = 1
    frame: Frame = Frame.LAB
    stages: int = 2  # Cayley stages per step: 1 = plain midpoint, 2 = higher-accuracy pair

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.stages not in (1, 2):
            raise ValueError("stages must be 1 or 2")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be > 0")
        if isinstance(self.initial, int) and not 0 <= self.initial <= self.profile.site_count:
            raise ValueError(
                f"initial site {self.initial} outside 0..{self.profile.site_count}"
            )

    def resolved_dt(self) -> float:
        """Explicit dt, else T/2000 for periodic drives, else 0.001/|rho|."""
        if self.dt is not None:
            return self.dt
        T = self.drive.period
        if T is not None:
            return T / 2000.0
        scale = abs(self.profile.rho)
        return 0.001 / scale if scale > 0 else 0.001

    def initial_state(self) -> LatticeState:
        if isinstance(self.initial, LatticeState):
            st = self.initial.copy()
            if st.site_count != self.profile.site_count:
                raise ValueError("initial state size does not match profile site_count")
            st.frame = self.frame
            return st
        if isinstance(self.initial, int):
            return LatticeState.single_site(self.initial, self.profile.site_count, self.frame)
        vec = np.asarray(self.initial, dtype=complex)
        if vec.size != self.profile.site_count + 1:
            raise ValueError("initial vector length must be site_count + 1")
        return LatticeState.from_vector(vec, self.frame)

    def with_(self, **kw) -> "SimulationConfig":
        return replace(self, **kw)


# ---------------------------------------------------------------------------
# Quadrature engine for sigma(t) and the propagator phase.
#
# Composite Simpson on a uniform grid per smooth segment, refined by doubling
# until the endpoint is stable to `rtol` relative. Cumulative values are kept
# at even nodes only, so every partial integral carries the full O(h^4) order;
# grids are aligned with the drive's discontinuity times.
# ---------------------------------------------------------------------------

_MIN_DENSITY = 4096  # nodes per period (or per run when no period exists)


def _segment_bounds(drive: DriveWaveform, t: float) -> list[tuple[float, float]]:
    knots = drive.smoothness_knots(0.0, t)
    pts = [0.0] + knots + [t]
    return [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]


def _sigma_phi_once(drive: DriveWaveform, rho: complex, t: float, density: float,
                    want_phi: bool) -> tuple[complex, float]:
    sig_acc = 0.0 + 0.0j
    phi_acc = 0.0
    for a, b in _segment_bounds(drive, t):
        length = b - a
        n = int(math.ceil(length * density / 4.0)) * 4
        n = max(n, 16)
        ts = np.linspace(a, b, n + 1)
        h = length / n
        f = np.exp(-1j * drive.phase_integral(ts))
        # Simpson increments over node pairs -> cumulative integral at even nodes
        inc = (h / 3.0) * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2])
        cum = np.concatenate(([0.0 + 0.0j], np.cumsum(inc)))
        if want_phi:
            sig_even = sig_acc + rho * cum
            g = np.imag(sig_even * np.conj(rho * f[::2]))
            # Simpson again on the even-node grid (spacing 2h, n/4 pairs)
            phi_acc += (2.0 * h / 3.0) * float(
                np.sum(g[0:-2:2] + 4.0 * g[1:-1:2] + g[2::2])
            )
        sig_acc += rho * cum[-1]
    return sig_acc, phi_acc


def _sigma_phi(drive: DriveWaveform, rho: complex, t: float, *, rtol: float = 1e-12,
               want_phi: bool = True, max_doublings: int = 10) -> tuple[complex, float]:
    if t == 0.0:
        return 0.0 + 0.0j, 0.0
    T = drive.period
    density = _MIN_DENSITY / T if T is not None else _MIN_DENSITY / t
    sig, phi = _sigma_phi_once(drive, rho, t, density, want_phi)
    for _ in range(max_doublings):
        density *= 2.0
        sig2, phi2 = _sigma_phi_once(drive, rho, t, density, want_phi)
        ok = abs(sig2 - sig) <= rtol * (1.0 + abs(sig2))
        if want_phi:
            ok = ok and abs(phi2 - phi) <= rtol * (1.0 + abs(phi2))
        sig, phi = sig2, phi2
        if ok:
            break
    return sig, phi


def sigma(drive: DriveWaveform, rho: complex, t: float) -> complex:
    """Path integral sigma(t) = rho * int_0^t exp(-i Phi) dt'.

    Closed forms for the zero and dc drives; adaptive Simpson elsewhere, with
    relative accuracy ~1e-12 (well inside the 1e-10*(1+|sigma|) contract).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if drive.kind is DriveKind.NONE:
        return rho * t
    if drive.kind is DriveKind.DC:
        if drive.F0 == 0.0:
            return rho * t
        return rho * (1.0 - cmath.exp(-1j * drive.F0 * t)) / (1j * drive.F0)
    return _sigma_phi(drive, rho, t, want_phi=False)[0]


def dl_residual(drive: DriveWaveform, T: float | None = None) -> complex:
    """int_0^T exp(-i Phi) dt over one period; zero exactly at dynamic localization.

    A zero drive needs an explicit nominal T (the integral is then T itself,
    so localization is impossible without a force); a dc drive is not periodic.
    """
    if drive.kind is DriveKind.DC:
        raise ValueError("dc drive is not periodic; no localization period exists")
    own = drive.period
    if T is None:
        if own is None:
            raise ValueError("zero drive requires an explicit nominal period T")
        T = own
    elif own is not None and not math.isclose(T, own, rel_tol=1e-9):
        raise ValueError(f"T={T:g} does not match the drive period {own:g}")
    if T <= 0:
        raise ValueError("T must be > 0")
    return sigma(drive, 1.0, T)


def _family_drive(family: DriveKind, F0: float, omega: float) -> DriveWaveform:
    if family is DriveKind.SINUSOIDAL:
        return DriveWaveform.sinusoidal(F0, omega)
    if family is DriveKind.SQUARE:
        return DriveWaveform.square(F0, omega)
    raise ValueError(f"no parametric amplitude family for drive kind {family.value}")


def find_dl_amplitude(family: DriveKind, omega: float, k: int, *,
                      scan_max: float = 20.0, scan_step: float = 0.05,
                      verify_tol: float = 1e-8) -> float:
    """k-th smallest F0 > 0 with |dl_residual| = 0 for the given drive family.

    Brackets sign changes of Re(residual) on an F0/omega grid, bisects each to
    convergence, and keeps only roots where the full |residual| vanishes (the
    square family has spurious real-part zeros between its true roots).
    """
    if k < 1:
        raise ValueError("root index k must be >= 1")
    if omega <= 0:
        raise ValueError("omega must be > 0")
    T = 2.0 * math.pi / omega

    def resid_re(ratio: float) -> float:
        return dl_residual(_family_drive(family, ratio * omega, omega)).real / T

    def resid_abs(ratio: float) -> float:
        return abs(dl_residual(_family_drive(family, ratio * omega, omega))) / T

    found = []
    r_lo = scan_step
    f_lo = resid_re(r_lo)
    r = r_lo
    while r < scan_max:
        r_hi = r + scan_step
        f_hi = resid_re(r_hi)
        if f_lo == 0.0 or f_lo * f_hi < 0.0:
            a, b = (r, r_hi)
            fa = f_lo
            for _ in range(60):
                m = 0.5 * (a + b)
                fm = resid_re(m)
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
            root = 0.5 * (a + b)
            if resid_abs(root) <= verify_tol:
                found.append(root)
                if len(found) == k:
                    return root * omega
        r, f_lo = r_hi, f_hi
    raise SearchError(
        f"only {len(found)} of {k} localization roots found for family {family.value}",
        (0.0, scan_max),
    )


def gauge_transform(state: LatticeState, drive: DriveWaveform,
                    direction: GaugeDirection) -> LatticeState:
    """Rephase amplitudes between lab (c_n) and gauge (b_n) frames.

    b_n = c_n * exp(+i n Phi(t)); moduli are untouched and the round trip is
    the identity to machine precision.
    """
    source = Frame.LAB if direction is GaugeDirection.LAB_TO_GAUGE else Frame.GAUGE
    if state.frame is not source:
        raise ValueError(f"state is in the {state.frame.value} frame; expected {source.value}")
    phi = drive.phase_integral(state.t)
    n = np.arange(state.amplitudes.size)
    sign = 1.0 if direction is GaugeDirection.LAB_TO_GAUGE else -1.0
    amp = state.amplitudes * np.exp(1j * sign * n * phi)
    target = Frame.GAUGE if direction is GaugeDirection.LAB_TO_GAUGE else Frame.LAB
    return LatticeState(amp, state.t, target)
