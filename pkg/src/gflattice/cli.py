"""Command-line front end: single runs, parameter sweeps, spectra, figure data.

Config files are TOML with [profile], [drive], [run], [output] sections (plus
[sweep] / [spectra] for those modes); see the README for the schema. All CSV
numbers are written with 17 significant digits so re-parsing reproduces the
stored doubles exactly and re-running a config is byte-identical.

Exit codes: 0 success, 1 config/input error, 2 numerical-validity error
(unitarity breach, or boundary leakage when [run] strict = true).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .exact import exact_state
from .model import (
    DriveKind,
    DriveWaveform,
    Frame,
    HoppingProfile,
    LatticeState,
    ProfileKind,
    SimulationConfig,
    find_dl_amplitude,
)
from .observables import compute_observables, revival_probability, self_imaging_error
from .propagate import evolve
from .spectra import (
    circular_spread,
    monodromy,
    quasienergies,
    stark_converged,
)

NORM_TOL = 1e-6  # норm drift beyond this is a hard numerical-validity failure
LEAKAGE_TOL = 1e-6


class ConfigError(ValueError):
    pass


class NumericalValidityError(RuntimeError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}")


def _req(section: dict, sec_name: str, key: str):
    if key not in section:
        raise ConfigError(f"{sec_name}.{key}: required key missing")
    return section[key]


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"{where}: expected a number or [re, im] pair")


def parse_profile(cfg: dict) -> HoppingProfile:
    sec = cfg.get("profile")
    if not isinstance(sec, dict):
        raise ConfigError("profile: section missing")
    kind_raw = _req(sec, "profile", "kind")
    try:
        kind = ProfileKind(kind_raw)
    except ValueError:
        raise ConfigError(f"profile.kind: unknown kind {kind_raw!r} "
                          f"(expected one of {[k.value for k in ProfileKind]})")
    rho = _as_complex(sec.get("rho", 1.0), "profile.rho")
    site_count = int(sec.get("site_count", 60))
    if site_count < 0:
        raise ConfigError("profile.site_count: must be >= 0")
    table = sec.get("custom_table")
    try:
        if kind is ProfileKind.CUSTOM:
            if table is None:
                raise ConfigError("profile.custom_table: required for the custom kind")
            return HoppingProfile.custom(table, rho=rho, site_count=site_count)
        return HoppingProfile(kind, rho, site_count)
    except ValueError as exc:
        raise ConfigError(f"profile: {exc}")


def parse_drive(cfg: dict, rho: complex) -> DriveWaveform:
    sec = cfg.get("drive")
    if not isinstance(sec, dict):
        raise ConfigError("drive: section missing")
    kind_raw = _req(sec, "drive", "kind")
    try:
        kind = DriveKind(kind_raw)
    except ValueError:
        raise ConfigError(f"drive.kind: unknown kind {kind_raw!r} "
                          f"(expected one of {[k.value for k in DriveKind]})")
    t0 = float(sec.get("t0", 0.0))

    def resolve_omega() -> float:
        if "omega" in sec and "omega_over_rho" in sec:
            raise ConfigError("drive: give omega or omega_over_rho, not both")
        if "omega" in sec:
            return float(sec["omega"])
        if "omega_over_rho" in sec:
            return float(sec["omega_over_rho"]) * abs(rho)
        raise ConfigError("drive.omega: required (or omega_over_rho)")

    def resolve_f0(omega: float | None) -> float:
        if "f0" in sec and "f0_over_omega" in sec:
            raise ConfigError("drive: give f0 or f0_over_omega, not both")
        if "f0" in sec:
            return float(sec["f0"])
        if "f0_over_omega" in sec:
            if omega is None:
                raise ConfigError("drive.f0_over_omega: needs a frequency")
            return float(sec["f0_over_omega"]) * omega
        raise ConfigError("drive.f0: required (or f0_over_omega)")

    try:
        if kind is DriveKind.NONE:
            return DriveWaveform.none()
        if kind is DriveKind.DC:
            return DriveWaveform.dc(resolve_f0(None))
        if kind in (DriveKind.SINUSOIDAL, DriveKind.SQUARE):
            omega = resolve_omega()
            f0 = resolve_f0(omega)
            maker = DriveWaveform.sinusoidal if kind is DriveKind.SINUSOIDAL else DriveWaveform.square
            return maker(f0, omega, t0)
        samples = _req(sec, "drive", "samples")
        period = float(_req(sec, "drive", "period"))
        return DriveWaveform.sampled(samples, period, t0)
    except ValueError as exc:
        raise ConfigError(f"drive: {exc}")


def parse_run(cfg: dict, profile: HoppingProfile, drive: DriveWaveform) -> tuple[SimulationConfig, dict]:
    sec = cfg.get("run", {})
    if not isinstance(sec, dict):
        raise ConfigError("run: must be a section")

    if "initial_site" in sec and "initial_vector" in sec:
        raise ConfigError("run: give initial_site or initial_vector, not both")
    if "initial_vector" in sec:
        vec = [_as_complex(v, "run.initial_vector") for v in sec["initial_vector"]]
        if len(vec) != profile.site_count + 1:
            raise ConfigError(f"run.initial_vector: length {len(vec)} != site_count+1 "
                              f"= {profile.site_count + 1}")
        initial = np.asarray(vec, dtype=complex)
    else:
        initial = int(sec.get("initial_site", 0))
        if not 0 <= initial <= profile.site_count:
            raise ConfigError(f"run.initial_site: {initial} outside 0..{profile.site_count}")

    T = drive.period
    if "t_end" in sec and "t_end_periods" in sec:
        raise ConfigError("run: give t_end or t_end_periods, not both")
    if "t_end_periods" in sec:
        if T is None:
            raise ConfigError("run.t_end_periods: drive has no period")
        t_end = float(sec["t_end_periods"]) * T
    else:
        t_end = float(sec.get("t_end", 0.0))
    if t_end < 0:
        raise ConfigError("run.t_end: must be >= 0")

    if "dt" in sec and "steps_per_period" in sec:
        raise ConfigError("run: give dt or steps_per_period, not both")
    if "steps_per_period" in sec:
        if T is None:
            raise ConfigError("run.steps_per_period: drive has no period")
        dt = T / int(sec["steps_per_period"])
    else:
        dt = float(sec["dt"]) if "dt" in sec else None
    if dt is not None and dt <= 0:
        raise ConfigError("run.dt: must be > 0")

    frame_raw = sec.get("frame", "lab")
    try:
        frame = Frame(frame_raw)
    except ValueError:
        raise ConfigError(f"run.frame: unknown frame {frame_raw!r}")
    stages = int(sec.get("stages", 2))
    if stages not in (1, 2):
        raise ConfigError("run.stages: must be 1 or 2")

    stride = sec.get("record_stride")
    if stride is None:
        eff_dt = dt if dt is not None else (T / 2000.0 if T is not None
                                            else 0.001 / max(abs(profile.rho), 1e-300))
        total = int(round(t_end / eff_dt)) if t_end > 0 else 1
        stride = max(1, total // 1000)
    stride = int(stride)
    if stride < 1:
        raise ConfigError("run.record_stride: must be >= 1")

    opts = {
        "exact_check": bool(sec.get("exact_check", False)),
        "strict": bool(sec.get("strict", False)),
    }
    if opts["exact_check"] and profile.kind is not ProfileKind.GLAUBER_FOCK:
        raise ConfigError("run.exact_check: analytic propagator exists only for "
                          "the glauber-fock profile")
    try:
        sim = SimulationConfig(profile=profile, drive=drive, initial=initial, dt=dt,
                               t_end=t_end, record_stride=stride, frame=frame, stages=stages)
    except ValueError as exc:
        raise ConfigError(f"run: {exc}")
    return sim, opts


def parse_output(cfg: dict, default_prefix: str) -> tuple[Path, str]:
    sec = cfg.get("output", {})
    if not isinstance(sec, dict):
        raise ConfigError("output: must be a section")
    directory = Path(sec.get("directory", "."))
    prefix = sec.get("prefix", default_prefix)
    return directory, str(prefix)


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------


def write_trajectory_csv(path: Path, traj) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "n", "re", "im", "abs2"])
        for i, t in enumerate(traj.times):
            row_amp = traj.amplitudes[i]
            for n in range(row_amp.size):
                a = row_amp[n]
                w.writerow([_fmt(float(t)), n, _fmt(a.real), _fmt(a.imag),
                            _fmt(abs(a) ** 2)])


def write_observables_csv(path: Path, series, extra: dict | None = None) -> None:
    channels = dict(series.channels)
    if extra:
        channels.update(extra)
    names = list(channels)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + names)
        for i, t in enumerate(series.times):
            w.writerow([_fmt(float(t))] + [_fmt(float(channels[n][i])) for n in names])


def write_manifest(path: Path, manifest: dict) -> None:
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_trajectory_csv(path: str):
    """Parse a trajectory CSV back into (times, site_count, amplitude matrix)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["t", "n", "re", "im", "abs2"]:
            raise ConfigError(f"{path}: not a trajectory CSV (bad header {header})")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 5:
                raise ConfigError(f"{path}: row {lineno}: expected 5 columns, got {len(row)}")
            try:
                rows.append((float(row[0]), int(row[1]), float(row[2]), float(row[3])))
            except ValueError as exc:
                raise ConfigError(f"{path}: row {lineno}: {exc}")
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    times = sorted({r[0] for r in rows})
    sites = sorted({r[1] for r in rows})
    if sites != list(range(len(sites))):
        raise ConfigError(f"{path}: site indices are not contiguous from 0")
    t_index = {t: i for i, t in enumerate(times)}
    amp = np.zeros((len(times), len(sites)), dtype=complex)
    seen = np.zeros(amp.shape, dtype=bool)
    for t, n, re, im in rows:
        amp[t_index[t], n] = re + 1j * im
        seen[t_index[t], n] = True
    if not seen.all():
        raise ConfigError(f"{path}: missing (t, n) entries; file is not a full grid")
    return np.asarray(times), len(sites) - 1, amp


# ---------------------------------------------------------------------------
# run modes
# ---------------------------------------------------------------------------


def _validity_check(traj, strict: bool) -> list[str]:
    problems = []
    drift = float(np.max(np.abs(traj.norms - 1.0)))
    if drift > NORM_TOL:
        raise NumericalValidityError(f"norm drift {drift:.2e} exceeds {NORM_TOL:g}")
    if traj.warnings and strict:
        raise NumericalValidityError("; ".join(traj.warnings))
    problems.extend(traj.warnings)
    return problems


def run_simulate(config_path: str) -> dict:
    raw = _load_toml(config_path)
    profile = parse_profile(raw)
    drive = parse_drive(raw, profile.rho)
    sim, opts = parse_run(raw, profile, drive)
    out_dir, prefix = parse_output(raw, "run")
    out_dir.mkdir(parents=True, exist_ok=True)

    started = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = evolve(sim)
    warn = _validity_check(traj, opts["strict"])
    series = compute_observables(traj)

    extra = None
    if opts["exact_check"]:
        init = traj.initial_state
        init.frame = Frame.GAUGE  # frames coincide at t = 0
        dev = np.zeros(len(traj))
        for i in range(len(traj)):
            ex = exact_state(init, drive, profile.rho, float(traj.times[i]))
            amp = ex.amplitudes
            if traj.frame is Frame.LAB:
                phi = drive.phase_integral(float(traj.times[i]))
                amp = amp * np.exp(-1j * np.arange(amp.size) * phi)
            dev[i] = float(np.max(np.abs(traj.amplitudes[i] - amp)))
        extra = {"exact_deviation": dev}

    traj_csv = out_dir / f"{prefix}_trajectory.csv"
    obs_csv = out_dir / f"{prefix}_observables.csv"
    write_trajectory_csv(traj_csv, traj)
    write_observables_csv(obs_csv, series, extra)

    summary: dict = {"samples": len(traj), "t_end": float(traj.times[-1])}
    T = drive.period
    if T is not None and sim.t_end > 0:
        k_max = int(math.floor(sim.t_end / T + 1e-9))
        pr = revival_probability(traj)
        revivals = []
        for k in range(1, k_max + 1):
            i, offset = traj.nearest_sample(k * T)
            err, _ = self_imaging_error(traj, k, with_offset=True)
            revivals.append({"k": k, "revival": float(pr[i]),
                             "self_imaging_error": err, "time_offset": offset})
        summary["periods"] = revivals
    if extra is not None:
        summary["max_exact_deviation"] = float(extra["exact_deviation"].max())

    manifest = {
        "mode": "simulate",
        "version": __version__,
        "config": raw,
        "duration_s": time.perf_counter() - started,
        "warnings": warn,
        "outputs": [str(traj_csv), str(obs_csv)],
        "summary": summary,
    }
    manifest_path = out_dir / f"{prefix}_manifest.json"
    write_manifest(manifest_path, manifest)
    manifest["manifest_path"] = str(manifest_path)
    return manifest


def _sweep_point(payload: dict) -> dict:
    """One sweep grid point; returns plain scalars (runs in a worker process)."""
    try:
        rho = complex(payload["rho_re"], payload["rho_im"])
        omega = payload["omega_over_rho"] * abs(rho)
        f0 = payload["f0_over_omega"] * omega
        profile = HoppingProfile(ProfileKind(payload["profile_kind"]), rho,
                                 payload["site_count"],
                                 payload.get("custom_table"))
        maker = (DriveWaveform.sinusoidal if payload["drive_kind"] == "sinusoidal"
                 else DriveWaveform.square)
        drive = maker(f0, omega)
        T = drive.period
        sim = SimulationConfig(
            profile=profile, drive=drive, initial=payload["initial_site"],
            dt=T / payload["steps_per_period"], t_end=payload["t_end_periods"] * T,
            record_stride=payload["steps_per_period"], frame=Frame.GAUGE,
            stages=payload["stages"],
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            traj = evolve(sim)
        pr = revival_probability(traj)
        i, _ = traj.nearest_sample(payload["t_end_periods"] * T)
        err = self_imaging_error(traj, int(payload["t_end_periods"]))
        out = {
            "revival_end": float(pr[i]),
            "self_imaging_error": float(err),
            "status": "ok",
        }
        if payload["quasienergy_spread"]:
            mono = monodromy(profile, drive, steps_per_period=payload["steps_per_period"])
            spec = quasienergies(mono)
            out["quasienergy_spread"] = circular_spread(spec.values, spec.omega)
        return out
    except Exception as exc:  # recorded per point; the sweep continues
        return {"revival_end": float("nan"), "self_imaging_error": float("nan"),
                "status": f"error: {exc}"}


def _grid_values(spec, name: str) -> list[float]:
    if isinstance(spec, list):
        return [float(v) for v in spec]
    if isinstance(spec, dict):
        for key in ("start", "stop", "count"):
            if key not in spec:
                raise ConfigError(f"sweep.{name}.{key}: required")
        count = int(spec["count"])
        if count < 1:
            raise ConfigError(f"sweep.{name}.count: must be >= 1")
        return list(np.linspace(float(spec["start"]), float(spec["stop"]), count))
    raise ConfigError(f"sweep.{name}: expected a list or {{start, stop, count}}")


def run_sweep(config_path: str) -> dict:
    raw = _load_toml(config_path)
    profile = parse_profile(raw)
    sec = raw.get("sweep")
    if not isinstance(sec, dict):
        raise ConfigError("sweep: section missing")
    drv = raw.get("drive", {})
    kind = drv.get("kind", "sinusoidal")
    if kind not in ("sinusoidal", "square"):
        raise ConfigError("sweep: drive.kind must be sinusoidal or square")

    f_axis = _grid_values(sec["f0_over_omega"], "f0_over_omega") \
        if "f0_over_omega" in sec else None
    w_axis = _grid_values(sec["omega_over_rho"], "omega_over_rho") \
        if "omega_over_rho" in sec else None
    if f_axis is None and w_axis is None:
        raise ConfigError("sweep: need f0_over_omega and/or omega_over_rho")
    if f_axis is None:
        f_fixed = drv.get("f0_over_omega")
        if f_fixed is None:
            raise ConfigError("sweep: f0_over_omega missing (grid or fixed drive value)")
        f_axis = [float(f_fixed)]
    if w_axis is None:
        w_fixed = drv.get("omega_over_rho")
        if w_fixed is None:
            raise ConfigError("sweep: omega_over_rho missing (grid or fixed drive value)")
        w_axis = [float(w_fixed)]

    points = [(f, w) for w in w_axis for f in f_axis]
    if len(points) > 100_000:
        raise ConfigError(f"sweep: grid has {len(points)} points, limit is 100000")

    run_sec = raw.get("run", {})
    base = {
        "rho_re": profile.rho.real,
        "rho_im": profile.rho.imag,
        "profile_kind": profile.kind.value,
        "site_count": profile.site_count,
        "custom_table": profile.custom_table,
        "drive_kind": kind,
        "initial_site": int(run_sec.get("initial_site", 0)),
        "t_end_periods": float(sec.get("t_end_periods", 1.0)),
        "steps_per_period": int(sec.get("steps_per_period", 2000)),
        "stages": int(run_sec.get("stages", 2)),
        "quasienergy_spread": bool(sec.get("quasienergy_spread", False)),
    }
    payloads = [dict(base, f0_over_omega=f, omega_over_rho=w) for f, w in points]

    out_dir, prefix = parse_output(raw, "sweep")
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    workers = int(sec.get("workers", 1))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, payloads, chunksize=4))
    else:
        results = [_sweep_point(p) for p in payloads]

    sweep_csv = out_dir / f"{prefix}_sweep.csv"
    cols = ["index", "f0_over_omega", "omega_over_rho", "revival_end", "self_imaging_error"]
    if base["quasienergy_spread"]:
        cols.append("quasienergy_spread")
    cols.append("status")
    with open(sweep_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for i, ((f, om), res) in enumerate(zip(points, results)):
            row = [i, _fmt(f), _fmt(om), _fmt(res["revival_end"]),
                   _fmt(res["self_imaging_error"])]
            if base["quasienergy_spread"]:
                row.append(_fmt(res.get("quasienergy_spread", float("nan"))))
            row.append(res["status"])
            w.writerow(row)

    failures = [r["status"] for r in results if r["status"] != "ok"]
    manifest = {
        "mode": "sweep",
        "version": __version__,
        "config": raw,
        "duration_s": time.perf_counter() - started,
        "warnings": failures,
        "outputs": [str(sweep_csv)],
        "summary": {"points": len(points), "failed": len(failures)},
    }
    manifest_path = out_dir / f"{prefix}_manifest.json"
    write_manifest(manifest_path, manifest)
    manifest["manifest_path"] = str(manifest_path)
    return manifest


def run_spectra(config_path: str) -> dict:
    raw = _load_toml(config_path)
    profile = parse_profile(raw)
    sec = raw.get("spectra")
    if not isinstance(sec, dict):
        raise ConfigError("spectra: section missing")
    mode = sec.get("mode")
    if mode not in ("monodromy", "stark"):
        raise ConfigError("spectra.mode: must be 'monodromy' or 'stark'")
    out_dir, prefix = parse_output(raw, "spectra")
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    N = int(sec.get("site_count", profile.site_count))
    summary: dict = {"site_count": N}

    spectrum_csv = out_dir / f"{prefix}_spectrum.csv"
    if mode == "monodromy":
        drive = parse_drive(raw, profile.rho)
        if drive.period is None:
            raise ConfigError("spectra: monodromy mode requires a periodic drive")
        steps = int(sec.get("steps_per_period", 4000))
        spec = quasienergies(monodromy(profile, drive, N, steps_per_period=steps))
        bigger = quasienergies(monodromy(profile, drive, N + 10, steps_per_period=steps))
        spec = spec.with_convergence(bigger)
        with open(spectrum_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "value", "converged"])
            for i, (v, c) in enumerate(zip(spec.values, spec.converged)):
                w.writerow([i, _fmt(float(v)), int(c)])
        summary["converged_levels"] = int(spec.converged.sum())
        summary["spread_converged"] = spec.spread(converged_only=True)
        summary["spread_all"] = spec.spread(converged_only=False)
        summary["omega"] = spec.omega
    else:
        if "f0" not in sec:
            raise ConfigError("spectra.f0: required for stark mode")
        f0 = float(sec["f0"])
        vals, flags = stark_converged(profile, f0, N)
        with open(spectrum_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "value", "converged", "spacing"])
            for i, (v, c) in enumerate(zip(vals, flags)):
                spacing = _fmt(float(vals[i + 1] - v)) if i + 1 < vals.size else ""
                w.writerow([i, _fmt(float(v)), int(c), spacing])
        summary["converged_levels"] = int(flags.sum())
        summary["f0"] = f0

    manifest = {
        "mode": f"spectra/{mode}",
        "version": __version__,
        "config": raw,
        "duration_s": time.perf_counter() - started,
        "warnings": [],
        "outputs": [str(spectrum_csv)],
        "summary": summary,
    }
    manifest_path = out_dir / f"{prefix}_manifest.json"
    write_manifest(manifest_path, manifest)
    manifest["manifest_path"] = str(manifest_path)
    return manifest


def emit_heatmap(traj_csv: str, out_path: str) -> None:
    """Render |c_n(t)| as a site-vs-time map plus the revival-probability trace."""
    times, N, amp = read_trajectory_csv(traj_csv)
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    mags = np.abs(amp)
    pr = np.abs(amp @ np.conj(amp[0])) ** 2

    fig, (ax0, ax1) = plt.subplots(
        2, 1, figsize=(7.0, 6.0), sharex=True,
        gridspec_kw={"height_ratios": [3, 1]},
    )
    if times.size > 1:
        mesh_t = np.concatenate([times, [times[-1] + (times[-1] - times[-2])]])
    else:
        mesh_t = np.array([times[0], times[0] + 1.0])
    mesh_n = np.arange(N + 2) - 0.5
    pcm = ax0.pcolormesh(mesh_t, mesh_n, mags.T, shading="flat", cmap="magma")
    fig.colorbar(pcm, ax=ax0, label=r"$|c_n(t)|$")
    ax0.set_ylabel("site $n$")
    ax1.plot(times, pr, lw=1.2)
    ax1.set_xlabel("t")
    ax1.set_ylabel(r"$P_r(t)$")
    ax1.set_ylim(-0.02, 1.05)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)


def run_dl_roots(family: str, omega: float, count: int) -> list[dict]:
    try:
        fam = DriveKind(family)
    except ValueError:
        raise ConfigError(f"unknown drive family {family!r}")
    roots = []
    for k in range(1, count + 1):
        f0 = find_dl_amplitude(fam, omega, k)
        roots.append({"k": k, "F0": f0, "F0_over_omega": f0 / omega})
    return roots


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gflattice",
        description="Driven Glauber-Fock lattice simulations: dynamic localization, "
                    "self-imaging, Floquet and Wannier-Stark spectra.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one evolution from a config file")
    s.add_argument("config")

    s = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    s.add_argument("config")

    s = sub.add_parser("spectra", help="quasienergy or Wannier-Stark spectrum")
    s.add_argument("config")

    s = sub.add_parser("dl-roots", help="locate dynamic-localization drive amplitudes")
    s.add_argument("--family", default="sinusoidal", choices=["sinusoidal", "square"])
    s.add_argument("--omega", type=float, required=True)
    s.add_argument("--count", type=int, default=1)

    s = sub.add_parser("heatmap", help="render a trajectory CSV as an SVG heat map")
    s.add_argument("csv")
    s.add_argument("-o", "--output", required=True)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            manifest = run_simulate(args.config)
            print(f"wrote {manifest['manifest_path']}")
            for w in manifest["warnings"]:
                print(f"warning: {w}", file=sys.stderr)
        elif args.command == "sweep":
            manifest = run_sweep(args.config)
            print(f"wrote {manifest['manifest_path']} "
                  f"({manifest['summary']['points']} points, "
                  f"{manifest['summary']['failed']} failed)")
        elif args.command == "spectra":
            manifest = run_spectra(args.config)
            print(f"wrote {manifest['manifest_path']}")
        elif args.command == "dl-roots":
            for r in run_dl_roots(args.family, args.omega, args.count):
                print(f"k={r['k']} F0={_fmt(r['F0'])} F0/omega={_fmt(r['F0_over_omega'])}")
        elif args.command == "heatmap":
            emit_heatmap(args.csv, args.output)
            print(f"wrote {args.output}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalValidityError as exc:
        print(f"numerical validity error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
