"""Command-line front end.

Subcommands: waveform, odmr, sweep-scan, analytic, fit, relaxometry,
gen-fixture.  Each takes an optional JSON config (--config) whose keys are
the command's parameters; individual CLI flags override config fields.
Artifacts (CSV, JSON, SVG) land under --out-dir.  CSV/JSON outputs are
byte-deterministic given config + seed.

Exit codes: 0 on success with converged fits, 1 on runtime/fit/data
failures, 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .csvio import (
    read_csv_columns,
    read_dataset_csv,
    write_csv,
    write_json,
)
from .fitting import (
    ExperimentDataset,
    FitError,
    JointFitConfig,
    averaged_contrast,
    fit_averaged_decay,
    fit_exponential_decay,
    joint_fit,
    normalize_by_reference,
)
from .lindblad import (
    DriveProtocol,
    IntegrationError,
    IntegratorConfig,
    RelaxationParams,
    make_sweep_simulator,
    transition_probability,
)
from .lz_analytics import SweepParams, p2_coherent, p2_dephased, p_lz, sweep_rate
from .spin_model import (
    LorentzianLine,
    SpinSystemParams,
    hyperfine_centers,
    synthesize_odmr_spectrum,
    transition_frequencies,
)
from .svgplot import Series, write_chart
from .waveform import ChirpSpec, generate_iq, instantaneous_frequency

__all__ = ["main"]


class UsageError(Exception):
    """Bad flags/config combinations; maps to exit code 2."""


_DEFAULTS: dict[str, dict] = {
    "waveform": {
        "f0": 3.2e9,
        "delta_f": 200e6,
        "duration": 1.67e-6,
        "sample_rate": 4e9,
    },
    "odmr": {
        "d_gs": 3.48e9,
        "e_gs": 50e6,
        "gamma_e": 28.024e9,
        "b0": 0.0,
        "hyperfine_spacing": 64e6,
        "n_hyperfine": 4,
        "fwhm": 25e6,
        "amplitude": 1.0,
        "branch": "both",
        "f_min": None,
        "f_max": None,
        "n_points": 1201,
    },
    "sweep-scan": {
        "rabi": 4.52e6,
        "delta_f": 200e6,
        "t1": 12.6e-6,
        "t2": 0.139e-6,
        "t_min": 0.2e-6,
        "t_max": 4e-6,
        "n_points": 40,
        "spacing": "log",
        "n_sweeps": [1],
        "direction_policy": "same",
        "crossing": "mid",
        "rel_tol": 1e-8,
        "abs_tol": 1e-10,
    },
    "analytic": {
        "rabi": 4.52e6,
        "delta_f": 200e6,
        "t_min": 0.2e-6,
        "t_max": 4e-6,
        "n_points": 40,
        "spacing": "log",
        "phi": None,
        "t2": None,
    },
    "fit": {
        "datasets": [],
        "delta_f": 200e6,
        "n_sweeps": 1,
        "direction_policy": "same",
        "crossing": "mid",
        "rabi_bounds": [1e5, 5e7],
        "gamma1_bounds": [1e4, 1e6],
        "gamma2_bounds": [1e6, 1e8],
        "max_cycles": 200,
        "coordinate_tolerance": 1e-6,
        "rel_tol": 1e-6,
        "abs_tol": 1e-9,
    },
    "relaxometry": {
        "input": None,
        "mode": "exponential",
        "tau1": None,
        "with_offset": False,
    },
    "gen-fixture": {
        "kind": "ramp-family",
        "seed": 20240817,
        # ramp-family parameters
        "t1": 12.63e-6,
        "rabis": [1.72e6, 2.42e6, 3.12e6, 3.82e6, 4.52e6],
        "t2s": [109e-9, 113.25e-9, 117.5e-9, 121.75e-9, 126e-9],
        "delta_f": 200e6,
        "t_min": 0.3e-6,
        "t_max": 9e-6,
        "n_points": 16,
        "noise_frac": 0.02,
        "nominal_factor": 3.0,
        # decay / averaged parameters
        "amplitude": 0.04,
        "tau": 12.48e-6,
        "tau2": 0.56e-6,
        "noise_sigma": 0.0,
    },
}


def _time_grid(cfg) -> np.ndarray:
    n = int(cfg["n_points"])
    if n < 1:
        raise UsageError(f"n_points must be >= 1, got {n}")
    lo, hi = float(cfg["t_min"]), float(cfg["t_max"])
    if not 0 < lo <= hi:
        raise UsageError(f"need 0 < t_min <= t_max, got {lo}, {hi}")
    if n == 1:
        return np.array([lo])
    if cfg["spacing"] == "log":
        return np.geomspace(lo, hi, n)
    if cfg["spacing"] == "linear":
        return np.linspace(lo, hi, n)
    raise UsageError(f"spacing must be 'log' or 'linear', got {cfg['spacing']!r}")


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------


def cmd_waveform(cfg, out_dir: Path) -> int:
    spec = ChirpSpec(
        f0=float(cfg["f0"]),
        delta_f=float(cfg["delta_f"]),
        duration=float(cfg["duration"]),
    )
    wf = generate_iq(spec, float(cfg["sample_rate"]))
    times = wf.times
    csv_path = out_dir / "waveform.csv"
    write_csv(csv_path, ("t_s", "i", "q"), (times, wf.i, wf.q))
    _, rf = instantaneous_frequency(times, spec)
    svg_path = out_dir / "waveform.svg"
    write_chart(
        svg_path,
        [Series("instantaneous frequency", times, rf)],
        "chirp frequency ramp",
        "time (s)",
        "frequency (Hz)",
    )
    print(f"wrote {csv_path} ({len(times)} samples) and {svg_path}")
    return 0


def cmd_odmr(cfg, out_dir: Path) -> int:
    params = SpinSystemParams(
        d_gs=float(cfg["d_gs"]),
        e_gs=float(cfg["e_gs"]),
        gamma_e=float(cfg["gamma_e"]),
        b0=float(cfg["b0"]),
        hyperfine_spacing=float(cfg["hyperfine_spacing"]),
        n_hyperfine=int(cfg["n_hyperfine"]),
    )
    f_minus, f_plus = transition_frequencies(params)
    branch = cfg["branch"]
    if branch == "lower":
        branch_centers = [f_minus]
    elif branch == "upper":
        branch_centers = [f_plus]
    elif branch == "both":
        branch_centers = [f_minus, f_plus]
    else:
        raise UsageError(
            f"branch must be 'lower', 'upper' or 'both', got {branch!r}"
        )
    lines = [
        LorentzianLine(center=c, fwhm=float(cfg["fwhm"]),
                       amplitude=float(cfg["amplitude"]))
        for bc in branch_centers
        for c in hyperfine_centers(
            bc, params.hyperfine_spacing, params.n_hyperfine
        )
    ]
    span = 0.5 * (params.n_hyperfine + 2) * params.hyperfine_spacing
    f_min = float(cfg["f_min"]) if cfg["f_min"] is not None else min(
        line.center for line in lines
    ) - span
    f_max = float(cfg["f_max"]) if cfg["f_max"] is not None else max(
        line.center for line in lines
    ) + span
    if not f_min < f_max:
        raise UsageError(f"need f_min < f_max, got {f_min}, {f_max}")
    freqs = np.linspace(f_min, f_max, int(cfg["n_points"]))
    signal = synthesize_odmr_spectrum(lines, freqs)
    csv_path = out_dir / "odmr.csv"
    write_csv(csv_path, ("frequency_hz", "contrast"), (freqs, signal))
    svg_path = out_dir / "odmr.svg"
    write_chart(
        svg_path,
        [Series("composite spectrum", freqs, signal)],
        f"ODMR spectrum at b0 = {params.b0:g} T",
        "frequency (Hz)",
        "contrast (arb.)",
    )
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _sweep_counts(raw) -> list[int]:
    counts = raw if isinstance(raw, (list, tuple)) else [raw]
    out = []
    for c in counts:
        n = int(c)
        if n < 1:
            raise UsageError(f"n_sweeps entries must be >= 1, got {c}")
        out.append(n)
    if not out:
        raise UsageError("n_sweeps must not be empty")
    return out


def cmd_sweep_scan(cfg, out_dir: Path) -> int:
    grid = _time_grid(cfg)
    counts = _sweep_counts(cfg["n_sweeps"])
    if (cfg["t1"] is None) != (cfg["t2"] is None):
        raise UsageError("t1 and t2 must be given together (or both omitted)")
    relax = (
        RelaxationParams.closed()
        if cfg["t1"] is None
        else RelaxationParams(t1=float(cfg["t1"]), t2=float(cfg["t2"]))
    )
    integ = IntegratorConfig(
        n_output_points=2,
        rel_tol=float(cfg["rel_tol"]),
        abs_tol=float(cfg["abs_tol"]),
        max_internal_steps=1_000_000,
    )
    columns = []
    for n in counts:
        col = np.empty(len(grid))
        for k, t_ramp in enumerate(grid):
            drive = DriveProtocol(
                rabi=float(cfg["rabi"]),
                delta_f=float(cfg["delta_f"]),
                sweep_time=float(t_ramp),
                n_sweeps=n,
                direction_policy=cfg["direction_policy"],
                crossing=cfg["crossing"],
            )
            try:
                col[k] = transition_probability(drive, relax, integ)
            except IntegrationError as exc:
                raise RuntimeError(
                    f"integration failed at grid point {k} "
                    f"(sweep_time = {t_ramp!r} s, n_sweeps = {n}): {exc}"
                ) from exc
        columns.append(col)

    if len(counts) == 1:
        header = ("sweep_time_s", "p_final")
    else:
        header = ("sweep_time_s",) + tuple(f"p_final_{n}sweeps" for n in counts)
    csv_path = out_dir / "sweep_scan.csv"
    write_csv(csv_path, header, (grid, *columns))
    svg_path = out_dir / "sweep_scan.svg"
    write_chart(
        svg_path,
        [
            Series(f"{n} sweep{'s' if n > 1 else ''}", grid, col)
            for n, col in zip(counts, columns)
        ],
        "final transition probability vs per-sweep ramp time",
        "sweep time (s)",
        "P(excited)",
        log_x=(cfg["spacing"] == "log"),
    )
    for n, col in zip(counts, columns):
        k = int(np.argmax(col))
        print(
            f"n_sweeps={n}: max p = {col[k]:.4f} at sweep_time = {grid[k]:.4e} s"
        )
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def cmd_analytic(cfg, out_dir: Path) -> int:
    grid = _time_grid(cfg)
    rabi = float(cfg["rabi"])
    delta_f = float(cfg["delta_f"])
    phi = None if cfg["phi"] is None else float(cfg["phi"])
    t2 = None if cfg["t2"] is None else float(cfg["t2"])
    if t2 is not None and phi is None:
        raise UsageError("t2 requires phi (the inter-crossing phase)")
    p_vals = np.array(
        [
            p_lz(rabi, sweep_rate(SweepParams(rabi, delta_f, float(t))))
            for t in grid
        ]
    )
    header = ["sweep_time_s", "p_lz"]
    columns = [grid, p_vals]
    series = [Series("single-passage p", grid, p_vals)]
    if phi is not None:
        p2c = np.array([p2_coherent(p, phi) for p in p_vals])
        header.append("p2_coherent")
        columns.append(p2c)
        series.append(Series("double, coherent", grid, p2c))
    if t2 is not None:
        p2d = np.array(
            [p2_dephased(p, phi, float(t), t2) for p, t in zip(p_vals, grid)]
        )
        header.append("p2_dephased")
        columns.append(p2d)
        series.append(Series("double, dephased", grid, p2d))
    csv_path = out_dir / "analytic.csv"
    write_csv(csv_path, header, columns)
    svg_path = out_dir / "analytic.svg"
    write_chart(
        svg_path,
        series,
        "closed-form transfer probabilities",
        "sweep time (s)",
        "probability",
        log_x=(cfg["spacing"] == "log"),
    )
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def _load_fit_datasets(cfg) -> list[ExperimentDataset]:
    entries = cfg["datasets"]
    if not entries:
        raise UsageError("no datasets given (config 'datasets' or --dataset)")
    datasets = []
    for entry in entries:
        if isinstance(entry, str):
            entry = {"path": entry}
        path = Path(entry["path"])
        if not path.exists():
            raise UsageError(f"dataset file does not exist: {path}")
        times, values = read_dataset_csv(path)
        label = entry.get("label", path.stem)
        datasets.append(
            ExperimentDataset(
                label=label,
                ramp_times=times,
                contrast=values,
                is_reference=bool(entry.get("is_reference", False)),
                nominal_rabi=entry.get("nominal_rabi"),
            )
        )
    return datasets


def cmd_fit(cfg, out_dir: Path) -> int:
    datasets = _load_fit_datasets(cfg)
    reference_label = cfg.get("reference")
    if reference_label is not None:
        labels = [ds.label for ds in datasets]
        if reference_label not in labels:
            raise UsageError(
                f"--reference {reference_label!r} matches no dataset label "
                f"(have: {', '.join(labels)})"
            )
        datasets = [
            ExperimentDataset(
                label=ds.label,
                ramp_times=ds.ramp_times,
                contrast=ds.contrast,
                is_reference=(ds.label == reference_label),
                nominal_rabi=ds.nominal_rabi,
            )
            for ds in datasets
        ]
    n_refs = sum(ds.is_reference for ds in datasets)
    if n_refs == 0:
        if len(datasets) > 1:
            raise UsageError(
                "multiple datasets but none flagged as reference; mark one "
                "with is_reference or --reference LABEL"
            )
        print(
            f"warning: promoting sole dataset {datasets[0].label!r} to "
            "reference",
            file=sys.stderr,
        )
        ds = datasets[0]
        datasets = [
            ExperimentDataset(
                label=ds.label,
                ramp_times=ds.ramp_times,
                contrast=ds.contrast,
                is_reference=True,
                nominal_rabi=ds.nominal_rabi,
            )
        ]
    datasets = normalize_by_reference(datasets)

    fit_cfg = JointFitConfig(
        rabi_bounds=tuple(cfg["rabi_bounds"]),
        gamma1_bounds=tuple(cfg["gamma1_bounds"]),
        gamma2_bounds=tuple(cfg["gamma2_bounds"]),
        max_cycles=int(cfg["max_cycles"]),
        coordinate_tolerance=float(cfg["coordinate_tolerance"]),
        integrator=IntegratorConfig(
            n_output_points=2,
            rel_tol=float(cfg["rel_tol"]),
            abs_tol=float(cfg["abs_tol"]),
            max_internal_steps=1_000_000,
        ),
    )
    simulator = make_sweep_simulator(
        delta_f=float(cfg["delta_f"]),
        n_sweeps=int(cfg["n_sweeps"]),
        direction_policy=cfg["direction_policy"],
        crossing=cfg["crossing"],
    )
    result = joint_fit(datasets, fit_cfg, simulator)

    doc = {
        "converged": result.converged,
        "t1_s": result.t1_shared,
        "sse": result.sse,
        "n_cycles_used": result.n_cycles_used,
        "delta_f_hz": float(cfg["delta_f"]),
        "n_sweeps": int(cfg["n_sweeps"]),
        "datasets": [
            {
                "label": ds.label,
                "is_reference": ds.is_reference,
                "rabi_hz": fit.rabi,
                "t2_s": fit.t2,
                "ramp_times_s": list(ds.ramp_times),
                "contrast_normalized": list(ds.contrast),
                "fitted_curve": list(curve),
            }
            for ds, fit, curve in zip(
                datasets, result.per_dataset, result.fitted_curves
            )
        ],
    }
    json_path = out_dir / "fit_result.json"
    write_json(json_path, doc)
    print(f"wrote {json_path}")
    for ds, curve in zip(datasets, result.fitted_curves):
        svg_path = out_dir / f"fit_{ds.label}.svg"
        write_chart(
            svg_path,
            [
                Series("data", ds.ramp_times, ds.contrast, style="points"),
                Series("fit", ds.ramp_times, curve),
            ],
            f"joint fit overlay: {ds.label}",
            "ramp time (s)",
            "normalized contrast",
            log_x=True,
        )
        print(f"wrote {svg_path}")
    print(
        f"t1 = {result.t1_shared:.4e} s, sse = {result.sse:.4e}, "
        f"cycles = {result.n_cycles_used}, converged = {result.converged}"
    )
    if not result.converged:
        print("error: joint fit did not converge", file=sys.stderr)
        return 1
    return 0


def cmd_relaxometry(cfg, out_dir: Path) -> int:
    if cfg["input"] is None:
        raise UsageError("relaxometry needs an input CSV (--input)")
    path = Path(cfg["input"])
    if not path.exists():
        raise UsageError(f"input file does not exist: {path}")
    times, values = read_csv_columns(path, ("time_s", "contrast"))
    mode = cfg["mode"]
    dense = np.linspace(times.min(), times.max(), 200)
    if mode == "exponential":
        r = fit_exponential_decay(times, values, with_offset=bool(cfg["with_offset"]))
        doc = {
            "mode": mode,
            "amplitude": r.amplitude,
            "tau_s": r.tau,
            "sigma_tau_s": r.sigma_tau,
            "offset": r.offset,
            "residual_norm": r.residual_norm,
        }
        curve = r.amplitude * np.exp(-dense / r.tau) + r.offset
        print(f"tau = {r.tau:.4e} s +/- {r.sigma_tau:.2e} s")
    elif mode == "averaged":
        if cfg["tau1"] is None:
            raise UsageError("averaged mode needs tau1 (the known T1)")
        p = fit_averaged_decay(times, values, tau1_fixed=float(cfg["tau1"]))
        doc = {
            "mode": mode,
            "amplitude": p.amplitude,
            "tau1_s": p.tau1,
            "tau2_s": p.tau2,
            "tau_eff_s": p.tau_eff,
        }
        curve = averaged_contrast(dense, p)
        print(f"tau2 = {p.tau2:.4e} s (tau_eff = {p.tau_eff:.4e} s)")
    else:
        raise UsageError(
            f"mode must be 'exponential' or 'averaged', got {mode!r}"
        )
    json_path = out_dir / "relaxometry.json"
    write_json(json_path, doc)
    svg_path = out_dir / "relaxometry.svg"
    write_chart(
        svg_path,
        [
            Series("data", times, values, style="points"),
            Series("fit", dense, curve),
        ],
        f"relaxometry fit ({mode})",
        "time (s)",
        "contrast",
    )
    print(f"wrote {json_path} and {svg_path}")
    return 0


def cmd_gen_fixture(cfg, out_dir: Path) -> int:
    seed = int(cfg["seed"])
    rng = np.random.default_rng(seed)
    kind = cfg["kind"]
    if kind == "ramp-family":
        rabis = [float(x) for x in cfg["rabis"]]
        t2s = [float(x) for x in cfg["t2s"]]
        if len(rabis) != len(t2s):
            raise UsageError(
                f"rabis and t2s must match in length, got "
                f"{len(rabis)} and {len(t2s)}"
            )
        grid = _time_grid({**cfg, "spacing": "log"})
        simulator = make_sweep_simulator(delta_f=float(cfg["delta_f"]))
        t1 = float(cfg["t1"])
        noise_frac = float(cfg["noise_frac"])
        ref_index = int(np.argmax(rabis))
        entries = []
        for k, (rabi, t2) in enumerate(zip(rabis, t2s)):
            curve = np.array(
                [simulator(rabi, t1, t2, float(t)) for t in grid]
            )
            noisy = curve + rng.normal(0.0, noise_frac * curve.max(), curve.shape)
            label = f"set{k + 1}"
            path = out_dir / f"dataset_{label}.csv"
            write_csv(path, ("ramp_time_s", "contrast"), (grid, noisy))
            entries.append(
                {
                    "label": label,
                    "path": str(path.resolve()),
                    "is_reference": k == ref_index,
                    "nominal_rabi": rabi * float(cfg["nominal_factor"]),
                    "true_rabi_hz": rabi,
                    "true_t2_s": t2,
                }
            )
            print(f"wrote {path}")
        manifest = {
            "kind": kind,
            "seed": seed,
            "noise_frac": noise_frac,
            "true_t1_s": t1,
            "delta_f_hz": float(cfg["delta_f"]),
            "datasets": entries,
        }
        write_json(out_dir / "manifest.json", manifest)
        fit_config = {
            "datasets": [
                {
                    "path": e["path"],
                    "label": e["label"],
                    "is_reference": e["is_reference"],
                    "nominal_rabi": e["nominal_rabi"],
                }
                for e in entries
            ],
            "delta_f": float(cfg["delta_f"]),
        }
        write_json(out_dir / "fit_config.json", fit_config)
        print(f"wrote {out_dir / 'manifest.json'} and {out_dir / 'fit_config.json'}")
        return 0
    if kind == "decay":
        grid = np.linspace(0.0, float(cfg["t_max"]), int(cfg["n_points"]))
        values = float(cfg["amplitude"]) * np.exp(-grid / float(cfg["tau"]))
        values = values + rng.normal(0.0, float(cfg["noise_sigma"]), grid.shape)
        path = out_dir / "decay.csv"
        write_csv(path, ("time_s", "contrast"), (grid, values))
        write_json(
            out_dir / "manifest.json",
            {
                "kind": kind,
                "seed": seed,
                "amplitude": float(cfg["amplitude"]),
                "tau_s": float(cfg["tau"]),
                "noise_sigma": float(cfg["noise_sigma"]),
            },
        )
        print(f"wrote {path} and {out_dir / 'manifest.json'}")
        return 0
    if kind == "averaged":
        from .fitting import AveragedDecayParams

        p = AveragedDecayParams(
            amplitude=float(cfg["amplitude"]),
            tau1=float(cfg["t1"]),
            tau2=float(cfg["tau2"]),
        )
        grid = np.geomspace(20e-9, float(cfg["t_max"]), int(cfg["n_points"]))
        values = averaged_contrast(grid, p)
        values = values + rng.normal(0.0, float(cfg["noise_sigma"]), grid.shape)
        path = out_dir / "averaged.csv"
        write_csv(path, ("time_s", "contrast"), (grid, values))
        write_json(
            out_dir / "manifest.json",
            {
                "kind": kind,
                "seed": seed,
                "amplitude": p.amplitude,
                "tau1_s": p.tau1,
                "tau2_s": p.tau2,
                "noise_sigma": float(cfg["noise_sigma"]),
            },
        )
        print(f"wrote {path} and {out_dir / 'manifest.json'}")
        return 0
    raise UsageError(
        f"kind must be 'ramp-family', 'decay' or 'averaged', got {kind!r}"
    )


# ---------------------------------------------------------------------------
# argument parsing and config merging
# ---------------------------------------------------------------------------

_HANDLERS = {
    "waveform": cmd_waveform,
    "odmr": cmd_odmr,
    "sweep-scan": cmd_sweep_scan,
    "analytic": cmd_analytic,
    "fit": cmd_fit,
    "relaxometry": cmd_relaxometry,
    "gen-fixture": cmd_gen_fixture,
}


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file for this command")
    sp.add_argument(
        "--out-dir", default=".", help="directory for output artifacts"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lzspin",
        description="Chirped-drive two-level simulation and fitting toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("waveform", help="synthesize an I/Q chirp")
    _add_common(sp)
    sp.add_argument("--f0", type=float, help="carrier frequency, Hz")
    sp.add_argument("--delta-f", dest="delta_f", type=float, help="ramp span, Hz")
    sp.add_argument("--duration", type=float, help="ramp duration, s")
    sp.add_argument(
        "--sample-rate", dest="sample_rate", type=float, help="sample rate, Hz"
    )

    sp = sub.add_parser("odmr", help="composite Lorentzian spectrum")
    _add_common(sp)
    sp.add_argument("--b0", type=float, help="static field, T")
    sp.add_argument("--fwhm", type=float, help="per-line FWHM, Hz")
    sp.add_argument("--branch", choices=("lower", "upper", "both"))
    sp.add_argument("--f-min", dest="f_min", type=float, help="grid start, Hz")
    sp.add_argument("--f-max", dest="f_max", type=float, help="grid end, Hz")
    sp.add_argument("--n-points", dest="n_points", type=int)

    sp = sub.add_parser("sweep-scan", help="engine scan over ramp time")
    _add_common(sp)
    sp.add_argument("--rabi", type=float, help="drive frequency, Hz")
    sp.add_argument("--delta-f", dest="delta_f", type=float)
    sp.add_argument("--t1", type=float, help="relaxation time, s")
    sp.add_argument("--t2", type=float, help="coherence time, s")
    sp.add_argument("--t-min", dest="t_min", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--n-points", dest="n_points", type=int)
    sp.add_argument("--spacing", choices=("log", "linear"))
    sp.add_argument(
        "--n-sweeps",
        dest="n_sweeps",
        help="comma-separated sweep counts, e.g. 1,2,3",
    )
    sp.add_argument(
        "--direction-policy",
        dest="direction_policy",
        choices=("same", "alternating"),
    )
    sp.add_argument("--crossing", choices=("mid", "start"))

    sp = sub.add_parser("analytic", help="closed-form transfer probabilities")
    _add_common(sp)
    sp.add_argument("--rabi", type=float)
    sp.add_argument("--delta-f", dest="delta_f", type=float)
    sp.add_argument("--t-min", dest="t_min", type=float)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--n-points", dest="n_points", type=int)
    sp.add_argument("--spacing", choices=("log", "linear"))
    sp.add_argument("--phi", type=float, help="inter-crossing phase, rad")
    sp.add_argument("--t2", type=float, help="dephasing time for p2_dephased, s")

    sp = sub.add_parser("fit", help="joint multi-dataset fit")
    _add_common(sp)
    sp.add_argument(
        "--dataset",
        action="append",
        dest="dataset",
        help="dataset CSV path (repeatable); overrides config datasets",
    )
    sp.add_argument("--reference", help="label of the reference dataset")
    sp.add_argument("--delta-f", dest="delta_f", type=float)
    sp.add_argument("--max-cycles", dest="max_cycles", type=int)

    sp = sub.add_parser("relaxometry", help="decay-curve fits")
    _add_common(sp)
    sp.add_argument("--input", help="CSV with header time_s,contrast")
    sp.add_argument("--mode", choices=("exponential", "averaged"))
    sp.add_argument("--tau1", type=float, help="fixed T1 for averaged mode, s")
    sp.add_argument(
        "--with-offset",
        dest="with_offset",
        action="store_const",
        const=True,
        help="add a flat baseline to the exponential model",
    )

    sp = sub.add_parser("gen-fixture", help="synthetic datasets with seeded noise")
    _add_common(sp)
    sp.add_argument("--kind", choices=("ramp-family", "decay", "averaged"))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--noise-frac", dest="noise_frac", type=float)
    sp.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    sp.add_argument("--n-points", dest="n_points", type=int)

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS[args.command])
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file does not exist: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError(f"{path}: config must be a JSON object")
        allowed = set(cfg) | ({"reference"} if args.command == "fit" else set())
        unknown = set(loaded) - allowed
        if unknown:
            raise UsageError(
                f"{path}: unknown config keys for {args.command}: "
                f"{', '.join(sorted(unknown))}"
            )
        cfg.update(loaded)
    for key in cfg:
        if hasattr(args, key) and getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    if args.command == "fit":
        if getattr(args, "dataset", None):
            cfg["datasets"] = [{"path": p} for p in args.dataset]
        if getattr(args, "reference", None) is not None:
            cfg["reference"] = args.reference
    if args.command == "sweep-scan" and isinstance(cfg["n_sweeps"], str):
        cfg["n_sweeps"] = [int(s) for s in cfg["n_sweeps"].split(",") if s]
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](cfg, out_dir)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FitError, IntegrationError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
