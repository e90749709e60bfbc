"""Derived quantities on trajectories: revival probability, moments, self-imaging error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .propagate import Trajectory

__all__ = [
    "ObservableSeries",
    "revival_probability",
    "self_imaging_error",
    "moments",
    "participation_ratio",
    "compute_observables",
]


@dataclass(frozen=True)
class ObservableSeries:
    """Named channels sharing the trajectory's sample grid."""

    times: np.ndarray
    channels: dict

    def __getitem__(self, name: str) -> np.ndarray:
        return self.channels[name]

    @property
    def names(self) -> list[str]:
        return list(self.channels)


def revival_probability(traj: Trajectory) -> np.ndarray:
    """P_r(t) = |<psi(0)|psi(t)>|^2 in the frame of the stored states."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    ref = np.conj(traj.amplitudes[0])
    return np.abs(traj.amplitudes @ ref) ** 2


def self_imaging_error(traj: Trajectory, k: int, *, with_offset: bool = False):
    """max_n | |c_n(kT)| - |c_n(0)| | at the sample nearest to kT.

    Modulus-based, hence identical in either frame and blind to global phases.
    With ``with_offset=True`` also returns the signed time offset of the
    nearest sample (the fixed-step grid need not contain kT exactly).
    """
    T = traj.config.drive.period
    if T is None:
        raise ValueError("self-imaging error requires a periodic drive")
    if k < 0:
        raise ValueError("period index must be >= 0")
    target = k * T
    if target > traj.times[-1] + 1e-9 * max(T, 1.0):
        raise ValueError(f"kT = {target:g} beyond the trajectory end {traj.times[-1]:g}")
    i, offset = traj.nearest_sample(target)
    err = float(np.max(np.abs(np.abs(traj.amplitudes[i]) - np.abs(traj.amplitudes[0]))))
    return (err, offset) if with_offset else err


def moments(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Mean site <n>(t) and spread Delta n(t) = sqrt(<n^2> - <n>^2)."""
    occ = np.abs(traj.amplitudes) ** 2
    n = np.arange(occ.shape[1])
    total = occ.sum(axis=1)
    mean = occ @ n / total
    mean_sq = occ @ (n * n) / total
    var = np.maximum(mean_sq - mean**2, 0.0)
    return mean, np.sqrt(var)


def participation_ratio(traj: Trajectory) -> np.ndarray:
    """1 / sum_n |c_n|^4, normalized per sample."""
    occ = np.abs(traj.amplitudes) ** 2
    occ = occ / occ.sum(axis=1, keepdims=True)
    return 1.0 / np.sum(occ**2, axis=1)


def compute_observables(traj: Trajectory) -> ObservableSeries:
    mean, spread = moments(traj)
    return ObservableSeries(
        times=traj.times,
        channels={
            "revival": revival_probability(traj),
            "norm": traj.norms.copy(),
            "mean_site": mean,
            "spread": spread,
            "participation": participation_ratio(traj),
            "leakage": traj.leakage.copy(),
        },
    )
