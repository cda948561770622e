"""Parameter estimation for ramped-inversion contrast data.

Three estimators live here:

* ``joint_fit`` — the multi-dataset coordinate-descent fit of ramp-time
  contrast curves against an open-system simulator.  One relaxation rate
  gamma1 is shared across datasets; each dataset carries its own coupling
  (rabi) and pure-dephasing rate gamma2, so five datasets make an
  11-parameter problem.  Each coordinate is minimized with bounded Brent
  (scipy ``minimize_scalar``); a candidate is accepted only if it does not
  raise the objective, which makes the SSE non-increasing by construction.
* ``fit_exponential_decay`` — A*exp(-t/tau) relaxometry fits with a
  one-standard-deviation ``sigma_tau`` taken from the residual-variance
  scaled covariance of the nonlinear least-squares fit.
* ``fit_averaged_decay`` — the collection-window model
  A*(tau_eff/T)*(1 - exp(-T/tau_eff)) with tau1 held fixed, returning the
  protocol-dependent decay time tau2 through
  1/tau_eff = 1/tau1 + 1/tau2.

The fit coordinates are rates (gamma1 = 1/t1, gamma2 = 1/t2 - 1/(2*t1)),
which keeps every visited point physical: t2 = 1/(gamma2 + gamma1/2) can
never exceed 2*t1 for gamma2 >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import curve_fit, minimize_scalar

from .lindblad import FIT_INTEGRATOR, IntegratorConfig

__all__ = [
    "ExperimentDataset",
    "JointFitConfig",
    "JointFitResult",
    "DatasetFit",
    "DecayFitResult",
    "AveragedDecayParams",
    "FitError",
    "InconsistentDecayError",
    "contrast",
    "normalize_by_reference",
    "evaluate_joint_sse",
    "joint_fit",
    "fit_exponential_decay",
    "averaged_contrast",
    "fit_averaged_decay",
]

# absolute SSE below which the joint fit declares itself done regardless of
# relative improvement (a perfect-model fixed point leaves nothing to improve)
_SSE_FLOOR = 1e-16

# refuse tau2 extraction when tau_eff is this close to (or beyond) tau1
_TAU_CONSISTENCY_MARGIN = 1e-9


class FitError(RuntimeError):
    """A least-squares fit failed (degenerate data, singular covariance,
    or a non-physical parameter iterate)."""


class InconsistentDecayError(FitError):
    """fit_averaged_decay found tau_eff >= tau1: no positive tau2 exists."""


def contrast(i_off: float, i_on: float) -> float:
    """Normalized difference (i_off - i_on)/i_off of the two count levels."""
    if not i_off > 0:
        raise ValueError(f"i_off must be > 0, got {i_off}")
    return (i_off - i_on) / i_off


@dataclass(frozen=True)
class ExperimentDataset:
    """One (ramp time, contrast) series, e.g. a single microwave gain.

    ``nominal_rabi`` (Hz) is optional drive-calibration metadata; when
    present the joint fit warm-starts that dataset's coupling at one third
    of it (the fitted effective coupling sits near a third of the
    single-transition nominal value when the line is a multi-component
    manifold).
    """

    label: str
    ramp_times: np.ndarray
    contrast: np.ndarray
    is_reference: bool = False
    nominal_rabi: float | None = None

    def __post_init__(self) -> None:
        times = np.asarray(self.ramp_times, dtype=float)
        values = np.asarray(self.contrast, dtype=float)
        if times.ndim != 1 or values.ndim != 1:
            raise ValueError("ramp_times and contrast must be 1-D")
        if times.size != values.size:
            raise ValueError(
                f"length mismatch: {times.size} ramp times vs "
                f"{values.size} contrast values in dataset {self.label!r}"
            )
        if times.size == 0:
            raise ValueError(f"dataset {self.label!r} is empty")
        if np.any(np.diff(times) <= 0):
            raise ValueError(
                f"ramp_times must be strictly increasing in dataset "
                f"{self.label!r}"
            )
        if self.nominal_rabi is not None and not self.nominal_rabi > 0:
            raise ValueError(f"nominal_rabi must be > 0, got {self.nominal_rabi}")
        object.__setattr__(self, "ramp_times", times)
        object.__setattr__(self, "contrast", values)

    def replace_contrast(self, values: np.ndarray) -> "ExperimentDataset":
        return ExperimentDataset(
            label=self.label,
            ramp_times=self.ramp_times,
            contrast=values,
            is_reference=self.is_reference,
            nominal_rabi=self.nominal_rabi,
        )


def normalize_by_reference(
    datasets: Sequence[ExperimentDataset],
) -> list[ExperimentDataset]:
    """Divide every contrast value by the reference dataset's maximum.

    Exactly one dataset must be flagged ``is_reference``; its peak maps to
    1 and the amplitude ratios between datasets are preserved.  The
    operation is idempotent.
    """
    refs = [ds for ds in datasets if ds.is_reference]
    if len(refs) != 1:
        raise ValueError(
            f"need exactly one reference dataset, got {len(refs)}"
        )
    peak = float(np.max(refs[0].contrast))
    if peak <= 0.0:
        raise ValueError(f"reference maximum must be > 0, got {peak}")
    return [ds.replace_contrast(ds.contrast / peak) for ds in datasets]


# ---------------------------------------------------------------------------
# joint multi-dataset fit
# ---------------------------------------------------------------------------

# simulator(rabi_hz, t1_s, t2_s, sweep_time_s, integrator) -> probability
Simulator = Callable[..., float]


@dataclass(frozen=True)
class JointFitConfig:
    """Bounds (per parameter class), iteration budget and integrator.

    rabi bounds are in Hz (drive frequency Omega/2pi); the relaxation
    bounds are rates in 1/s.  The gamma2 defaults [1e6, 1e8] mirror a
    10 ns .. 1000 ns coherence-time bracket (the gamma1/2 cross term shifts
    the equivalent t2 by under a percent for the t1 bracket).
    """

    rabi_bounds: tuple[float, float] = (1e5, 5e7)
    gamma1_bounds: tuple[float, float] = (1e4, 1e6)
    gamma2_bounds: tuple[float, float] = (1e6, 1e8)
    max_cycles: int = 200
    coordinate_tolerance: float = 1e-6
    integrator: IntegratorConfig = field(default_factory=lambda: FIT_INTEGRATOR)

    def __post_init__(self) -> None:
        for name in ("rabi_bounds", "gamma1_bounds", "gamma2_bounds"):
            lo, hi = getattr(self, name)
            if not (0 <= lo < hi):
                raise ValueError(f"{name} must satisfy 0 <= lo < hi, got {lo}, {hi}")
        if self.max_cycles < 1:
            raise ValueError(f"max_cycles must be >= 1, got {self.max_cycles}")
        if not self.coordinate_tolerance > 0:
            raise ValueError(
                f"coordinate_tolerance must be > 0, got {self.coordinate_tolerance}"
            )


@dataclass(frozen=True)
class DatasetFit:
    label: str
    rabi: float
    t2: float


@dataclass(frozen=True)
class JointFitResult:
    """Shared t1, per-dataset (rabi, t2), and bookkeeping.

    ``fitted_curves`` holds the simulated (and, when a reference dataset is
    present, reference-normalized) probability curve for each dataset at
    the fitted parameters, in input order.
    """

    t1_shared: float
    per_dataset: tuple[DatasetFit, ...]
    sse: float
    n_cycles_used: int
    converged: bool
    fitted_curves: tuple[np.ndarray, ...]


def _t2_from_rates(g1: float, g2: float) -> float:
    return 1.0 / (g2 + 0.5 * g1)


def _raw_curves(
    datasets: Sequence[ExperimentDataset],
    g1: float,
    rabis: Sequence[float],
    g2s: Sequence[float],
    simulator: Simulator,
    integrator: IntegratorConfig,
) -> list[np.ndarray]:
    """Simulated probability curve per dataset (no shared state; the
    per-dataset evaluations are independent and safe to fan out)."""
    t1 = 1.0 / g1
    out = []
    for ds, rabi, g2 in zip(datasets, rabis, g2s):
        t2 = _t2_from_rates(g1, g2)
        out.append(
            np.array(
                [simulator(rabi, t1, t2, float(t), integrator) for t in ds.ramp_times]
            )
        )
    return out


def _sse_of(
    datasets: Sequence[ExperimentDataset],
    curves: Sequence[np.ndarray],
    ref_index: int | None,
) -> float:
    if ref_index is None:
        sims = curves
    else:
        peak = float(np.max(curves[ref_index]))
        if peak <= 0.0:
            return math.inf
        sims = [c / peak for c in curves]
    return float(
        sum(np.sum((ds.contrast - sim) ** 2) for ds, sim in zip(datasets, sims))
    )


def _reference_index(datasets: Sequence[ExperimentDataset]) -> int | None:
    refs = [i for i, ds in enumerate(datasets) if ds.is_reference]
    if len(refs) > 1:
        raise ValueError(f"at most one reference dataset allowed, got {len(refs)}")
    return refs[0] if refs else None


def evaluate_joint_sse(
    datasets: Sequence[ExperimentDataset],
    t1: float,
    rabis: Sequence[float],
    t2s: Sequence[float],
    simulator: Simulator,
    integrator: IntegratorConfig = FIT_INTEGRATOR,
) -> float:
    """The joint objective at explicit physical parameters.

    Simulated curves are normalized by the reference curve's maximum when a
    reference dataset is present (mirroring the data normalization),
    otherwise compared to the data as-is.
    """
    if len(rabis) != len(datasets) or len(t2s) != len(datasets):
        raise ValueError("need one rabi and one t2 per dataset")
    g1 = 1.0 / t1
    g2s = [max(1.0 / t2 - 0.5 * g1, 0.0) for t2 in t2s]
    curves = _raw_curves(datasets, g1, rabis, g2s, simulator, integrator)
    return _sse_of(datasets, curves, _reference_index(datasets))


def joint_fit(
    datasets: Sequence[ExperimentDataset],
    cfg: JointFitConfig,
    simulator: Simulator,
) -> JointFitResult:
    """Coordinate-descent minimization of the summed squared residuals.

    Visits the shared gamma1, then each dataset's rabi, then each
    dataset's gamma2 (fixed order), one bounded Brent minimization per
    coordinate per cycle, until the relative SSE improvement over a full
    cycle drops below ``cfg.coordinate_tolerance`` or ``cfg.max_cycles``
    is exhausted (the latter yields ``converged=False`` rather than an
    exception).
    """
    if len(datasets) == 0:
        raise ValueError("need at least one dataset")
    ref_index = _reference_index(datasets)
    n = len(datasets)

    g1_lo, g1_hi = cfg.gamma1_bounds
    om_lo, om_hi = cfg.rabi_bounds
    g2_lo, g2_hi = cfg.gamma2_bounds

    g1 = math.sqrt(g1_lo * g1_hi)
    rabis = [
        min(max(ds.nominal_rabi / 3.0, om_lo), om_hi)
        if ds.nominal_rabi is not None
        else math.sqrt(om_lo * om_hi)
        for ds in datasets
    ]
    g2s = [math.sqrt(g2_lo * g2_hi)] * n

    curves = _raw_curves(datasets, g1, rabis, g2s, simulator, cfg.integrator)
    sse = _sse_of(datasets, curves, ref_index)

    def curve_for(i: int, g1_c: float, rabi_c: float, g2_c: float) -> np.ndarray:
        t1 = 1.0 / g1_c
        t2 = _t2_from_rates(g1_c, g2_c)
        return np.array(
            [
                simulator(rabi_c, t1, t2, float(t), cfg.integrator)
                for t in datasets[i].ramp_times
            ]
        )

    def minimize_coordinate(objective, lo, hi, current_sse):
        res = minimize_scalar(
            objective,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-4 * (hi - lo)},
        )
        if res.fun < current_sse:
            return float(res.x), float(res.fun), True
        return math.nan, current_sse, False

    n_cycles = 0
    converged = False
    for _ in range(cfg.max_cycles):
        n_cycles += 1
        sse_before = sse

        # shared gamma1 (moves every curve: t1 and every t2 depend on it)
        def sse_at_g1(g1_c):
            trial = [curve_for(i, g1_c, rabis[i], g2s[i]) for i in range(n)]
            return _sse_of(datasets, trial, ref_index)

        best, sse, accepted = minimize_coordinate(sse_at_g1, g1_lo, g1_hi, sse)
        if accepted:
            g1 = best
            curves = [curve_for(i, g1, rabis[i], g2s[i]) for i in range(n)]

        # per-dataset coupling, then per-dataset dephasing
        for kind in ("rabi", "gamma2"):
            for i in range(n):

                def sse_at(x, i=i, kind=kind):
                    if kind == "rabi":
                        trial_i = curve_for(i, g1, x, g2s[i])
                    else:
                        trial_i = curve_for(i, g1, rabis[i], x)
                    trial = list(curves)
                    trial[i] = trial_i
                    return _sse_of(datasets, trial, ref_index)

                lo, hi = (om_lo, om_hi) if kind == "rabi" else (g2_lo, g2_hi)
                best, sse, accepted = minimize_coordinate(sse_at, lo, hi, sse)
                if accepted:
                    if kind == "rabi":
                        rabis[i] = best
                    else:
                        g2s[i] = best
                    curves[i] = curve_for(i, g1, rabis[i], g2s[i])

        if sse <= _SSE_FLOOR:
            converged = True
            break
        if sse_before > 0 and (sse_before - sse) / sse_before < cfg.coordinate_tolerance:
            converged = True
            break

    if ref_index is None:
        fitted = tuple(c.copy() for c in curves)
    else:
        peak = float(np.max(curves[ref_index]))
        fitted = tuple(c / peak for c in curves)
    per_dataset = tuple(
        DatasetFit(label=ds.label, rabi=rabis[i], t2=_t2_from_rates(g1, g2s[i]))
        for i, ds in enumerate(datasets)
    )
    return JointFitResult(
        t1_shared=1.0 / g1,
        per_dataset=per_dataset,
        sse=sse,
        n_cycles_used=n_cycles,
        converged=converged,
        fitted_curves=fitted,
    )


# ---------------------------------------------------------------------------
# exponential relaxometry fit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFitResult:
    """A*exp(-t/tau) (+ optional flat offset) least-squares estimate."""

    amplitude: float
    tau: float
    sigma_tau: float
    residual_norm: float
    offset: float = 0.0


def _initial_decay_guess(t: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    a0 = v[int(np.argmin(t))]
    span = float(t.max() - t.min())
    tau0 = span / 3.0 if span > 0 else 1.0
    if np.all(v > 0) or np.all(v < 0):
        # log-linear slope gives a much better tau start when the sign allows
        slope, _ = np.polyfit(t, np.log(np.abs(v)), 1)
        if slope < 0:
            tau0 = -1.0 / slope
    return float(a0), float(tau0)


def fit_exponential_decay(
    times: Sequence[float],
    values: Sequence[float],
    with_offset: bool = False,
) -> DecayFitResult:
    """Least-squares A*exp(-t/tau); ``with_offset`` adds a flat baseline.

    ``sigma_tau`` is one standard deviation from the residual-variance
    scaled covariance of the fit (the inverse Gauss-Newton normal matrix
    at the optimum).
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape:
        raise ValueError("times and values must be 1-D and the same length")
    n_params = 3 if with_offset else 2
    if t.size < n_params + 1:
        raise ValueError(f"need at least {n_params + 1} points, got {t.size}")
    if np.all(v == v[0]):
        raise FitError("values are constant; no decay to fit")

    # fit in O(1) units, then undo the scaling
    t_scale = float(np.max(np.abs(t)))
    if t_scale <= 0:
        raise ValueError("times must span a positive range")
    v_scale = float(np.max(np.abs(v)))
    ts, vs = t / t_scale, v / v_scale
    a0, tau0 = _initial_decay_guess(ts, vs)
    tau0 = min(max(tau0, 1e-3), 1e3)

    if with_offset:
        def model(x, a, tau, c):
            return a * np.exp(-x / tau) + c
        p0 = [a0, tau0, float(vs[-1])]
    else:
        def model(x, a, tau):
            return a * np.exp(-x / tau)
        p0 = [a0, tau0]

    try:
        with np.errstate(over="ignore", invalid="ignore"):
            popt, pcov = curve_fit(
                model, ts, vs, p0=p0, maxfev=20000,
                ftol=1e-15, xtol=1e-15, gtol=1e-15,
            )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"exponential fit did not converge: {exc}") from exc
    if not popt[1] > 0:
        raise FitError(f"fitted tau is non-positive: {popt[1] * t_scale}")
    var_tau = pcov[1, 1]
    if not np.isfinite(var_tau):
        raise FitError("singular normal matrix; tau uncertainty undefined")

    residual = v - v_scale * model(ts, *popt)
    return DecayFitResult(
        amplitude=float(popt[0] * v_scale),
        tau=float(popt[1] * t_scale),
        sigma_tau=float(math.sqrt(max(var_tau, 0.0)) * t_scale),
        residual_norm=float(np.linalg.norm(residual)),
        offset=float(popt[2] * v_scale) if with_offset else 0.0,
    )


# ---------------------------------------------------------------------------
# collection-window averaged decay (two parallel relaxation pathways)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AveragedDecayParams:
    """Amplitude plus the two pathway time constants; tau_eff is derived
    so 1/tau_eff = 1/tau1 + 1/tau2 holds by construction."""

    amplitude: float
    tau1: float
    tau2: float

    def __post_init__(self) -> None:
        if not self.tau1 > 0:
            raise ValueError(f"tau1 must be > 0, got {self.tau1}")
        if not self.tau2 > 0:
            raise ValueError(f"tau2 must be > 0, got {self.tau2}")

    @property
    def tau_eff(self) -> float:
        return self.tau1 * self.tau2 / (self.tau1 + self.tau2)


def averaged_contrast(T, p: AveragedDecayParams):
    """Window-averaged contrast A*(tau_eff/T)*(1 - exp(-T/tau_eff)).

    Stable down to T << tau_eff (expm1 keeps the small-window limit -> A
    exact to rounding); accepts scalar or array T > 0.
    """
    T = np.asarray(T, dtype=float)
    if np.any(T <= 0):
        raise ValueError("collection time T must be > 0")
    tau = p.tau_eff
    out = p.amplitude * (tau / T) * (-np.expm1(-T / tau))
    return float(out) if out.ndim == 0 else out


def fit_averaged_decay(
    collection_times: Sequence[float],
    values: Sequence[float],
    tau1_fixed: float,
) -> AveragedDecayParams:
    """Fit (A, tau_eff) to the window-averaged decay, then split off tau2.

    ``tau1_fixed`` is the independently known relaxation time; tau2 follows
    from 1/tau_eff = 1/tau1 + 1/tau2.  If the fitted tau_eff is not below
    tau1_fixed there is no positive tau2 and InconsistentDecayError is
    raised.
    """
    t = np.asarray(collection_times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape:
        raise ValueError("collection_times and values must be 1-D, same length")
    if t.size < 3:
        raise ValueError(f"need at least 3 points, got {t.size}")
    if not tau1_fixed > 0:
        raise ValueError(f"tau1_fixed must be > 0, got {tau1_fixed}")
    if np.any(t <= 0):
        raise ValueError("collection times must be > 0")
    if np.all(v == v[0]):
        raise FitError("values are constant; no decay to fit")

    t_scale = float(np.max(t))
    v_scale = float(np.max(np.abs(v)))
    ts, vs = t / t_scale, v / v_scale

    def model(x, a, tau_eff):
        with np.errstate(over="ignore", invalid="ignore"):
            return a * (tau_eff / x) * (-np.expm1(-x / tau_eff))

    p0 = [float(vs[int(np.argmin(ts))]), float(np.median(ts)) / 2.0]
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            popt, _ = curve_fit(
                model, ts, vs, p0=p0, maxfev=20000,
                ftol=1e-15, xtol=1e-15, gtol=1e-15,
            )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"averaged-decay fit did not converge: {exc}") from exc
    tau_eff = float(popt[1] * t_scale)
    if not tau_eff > 0:
        raise FitError(f"fitted tau_eff is non-positive: {tau_eff}")
    if tau_eff >= tau1_fixed * (1.0 - _TAU_CONSISTENCY_MARGIN):
        raise InconsistentDecayError(
            f"fitted tau_eff = {tau_eff:.6e} s is not below tau1 = "
            f"{tau1_fixed:.6e} s; no positive tau2 reproduces the data"
        )
    tau2 = 1.0 / (1.0 / tau_eff - 1.0 / tau1_fixed)
    return AveragedDecayParams(
        amplitude=float(popt[0] * v_scale), tau1=tau1_fixed, tau2=tau2
    )
