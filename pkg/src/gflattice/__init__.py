"""Simulation and analysis of ac-driven Glauber-Fock lattices.

Dynamic localization in a semi-infinite chain with kappa_n = rho*sqrt(n)
hopping: a norm-preserving tridiagonal integrator, the analytic
displacement-operator propagator it must agree with, Floquet quasienergies,
Wannier-Stark spectra, and a CLI for runs, parameter sweeps and figure data.
"""

from .model import (
    DriveKind,
    DriveWaveform,
    Frame,
    GaugeDirection,
    HoppingProfile,
    LatticeState,
    ProfileKind,
    SearchError,
    SimulationConfig,
    dl_residual,
    find_dl_amplitude,
    gauge_transform,
    sigma,
)
from .propagate import (
    LeakageWarning,
    Trajectory,
    TridiagonalAction,
    build_action,
    convergence_study,
    evolve,
    step,
)
from .exact import (
    DisplacementPropagator,
    HeadroomError,
    bessel_j,
    displacement_column,
    displacement_matrix_element,
    exact_state,
    laguerre_assoc,
    sigma_and_phase,
)
from .observables import (
    ObservableSeries,
    compute_observables,
    moments,
    participation_ratio,
    revival_probability,
    self_imaging_error,
)
from .spectra import (
    MonodromyMatrix,
    NonUnitaryError,
    QuasienergySpectrum,
    circular_spread,
    monodromy,
    quasienergies,
    quasienergy_spectrum,
    stark_converged,
    stark_spectrum,
)

__version__ = "0.1.0"
