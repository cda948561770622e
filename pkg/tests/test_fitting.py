"""Tests for dataset handling, the joint coordinate-descent fit, and the
relaxometry / averaged-decay estimators.

The joint-fit oracles are self-consistency round trips: curves generated by
the same simulator the fit consumes, with known parameters, optionally plus
seeded noise.  The decay fits are checked against noiseless closed-form
data (exact recovery) and against analytically expected behavior of the
covariance-based uncertainty.
"""

import math

import numpy as np
import pytest

from lzspin.fitting import (
    AveragedDecayParams,
    DecayFitResult,
    ExperimentDataset,
    FitError,
    InconsistentDecayError,
    JointFitConfig,
    averaged_contrast,
    contrast,
    evaluate_joint_sse,
    fit_averaged_decay,
    fit_exponential_decay,
    joint_fit,
    normalize_by_reference,
)
from lzspin.lindblad import make_sweep_simulator

SIM = make_sweep_simulator(delta_f=200e6)
RAMP = np.geomspace(0.3e-6, 6e-6, 8)


def _curve(rabi, t1, t2, ramp=RAMP):
    return np.array([SIM(rabi, t1, t2, float(t)) for t in ramp])


# ---------------------------------------------------------------------------
# contrast and dataset plumbing
# ---------------------------------------------------------------------------


def test_contrast_arithmetic():
    assert contrast(100.0, 100.0) == 0.0
    assert contrast(100.0, 95.0) == pytest.approx(0.05, rel=1e-15)
    # the resonant pi-pulse contrast scale
    assert contrast(100.0, 98.8) == pytest.approx(0.012, rel=1e-12)
    with pytest.raises(ValueError):
        contrast(0.0, 1.0)
    with pytest.raises(ValueError):
        contrast(-5.0, 1.0)


def test_dataset_validation():
    with pytest.raises(ValueError, match="length mismatch"):
        ExperimentDataset("a", [1e-6, 2e-6], [0.1])
    with pytest.raises(ValueError, match="strictly increasing"):
        ExperimentDataset("a", [1e-6, 1e-6], [0.1, 0.2])
    with pytest.raises(ValueError, match="empty"):
        ExperimentDataset("a", [], [])
    with pytest.raises(ValueError, match="nominal_rabi"):
        ExperimentDataset("a", [1e-6], [0.1], nominal_rabi=0.0)
    ds = ExperimentDataset("ok", [1e-6, 2e-6], [0.1, 0.2])
    assert ds.ramp_times.dtype == float
    assert ds.contrast.dtype == float


def test_normalize_by_reference():
    times = np.array([1e-6, 2e-6, 3e-6])
    strong = ExperimentDataset("g30000", times, [2.0, 4.85, 3.0], is_reference=True)
    weak = ExperimentDataset("g10000", times, [1.0, 2.74, 2.0])
    out = normalize_by_reference([strong, weak])
    assert np.max(out[0].contrast) == pytest.approx(1.0, rel=1e-15)
    assert np.max(out[1].contrast) == pytest.approx(0.5649484536082475, rel=1e-12)
    # idempotent
    again = normalize_by_reference(out)
    assert np.allclose(again[0].contrast, out[0].contrast, rtol=1e-15)
    assert np.allclose(again[1].contrast, out[1].contrast, rtol=1e-15)
    # scale invariant
    scaled = normalize_by_reference(
        [strong.replace_contrast(strong.contrast * 7.3),
         weak.replace_contrast(weak.contrast * 7.3)]
    )
    assert np.allclose(scaled[1].contrast, out[1].contrast, rtol=1e-12)


def test_normalize_by_reference_errors():
    times = np.array([1e-6, 2e-6])
    a = ExperimentDataset("a", times, [0.1, 0.2])
    b = ExperimentDataset("b", times, [0.1, 0.2], is_reference=True)
    with pytest.raises(ValueError, match="exactly one reference"):
        normalize_by_reference([a])
    with pytest.raises(ValueError, match="exactly one reference"):
        normalize_by_reference([b, b])
    bad = ExperimentDataset("z", times, [-0.2, -0.1], is_reference=True)
    with pytest.raises(ValueError, match="reference maximum"):
        normalize_by_reference([bad, a])


# ---------------------------------------------------------------------------
# joint fit
# ---------------------------------------------------------------------------


def test_joint_sse_zero_at_true_parameters():
    curve = _curve(4.52e6, 12.63e-6, 0.139e-6)
    ds = ExperimentDataset("perfect", RAMP, curve)
    sse = evaluate_joint_sse([ds], 12.63e-6, [4.52e6], [0.139e-6], SIM)
    assert sse < 1e-10


def test_joint_fit_round_trip_two_datasets():
    t1_true = 12.63e-6
    truth = [(2.5e6, 120e-9), (4.0e6, 112e-9)]
    ramp = np.geomspace(0.3e-6, 9e-6, 12)
    rng = np.random.default_rng(42)
    datasets = []
    for k, (om, t2) in enumerate(truth):
        curve = _curve(om, t1_true, t2, ramp)
        noisy = curve + rng.normal(0.0, 0.01 * curve.max(), curve.shape)
        datasets.append(
            ExperimentDataset(
                label=f"gain{k}", ramp_times=ramp, contrast=noisy,
                is_reference=(k == 1), nominal_rabi=3 * om,
            )
        )
    datasets = normalize_by_reference(datasets)
    result = joint_fit(datasets, JointFitConfig(), SIM)
    assert result.converged
    assert abs(result.t1_shared - t1_true) / t1_true < 0.10
    for fit, (om, _) in zip(result.per_dataset, truth):
        assert abs(fit.rabi - om) / om < 0.05
    assert result.sse >= 0.0
    assert len(result.fitted_curves) == 2
    assert result.fitted_curves[1].shape == ramp.shape
    # fitted curves carry the same normalization as the data
    assert np.max(result.fitted_curves[1]) == pytest.approx(1.0, abs=1e-12)


def test_joint_fit_sse_non_increasing_in_cycle_budget():
    rng = np.random.default_rng(3)
    curve = _curve(4e6, 12.63e-6, 0.12e-6)
    ds = ExperimentDataset("m", RAMP, curve + rng.normal(0.0, 0.01, curve.shape))
    sses = [
        joint_fit([ds], JointFitConfig(max_cycles=mc), SIM).sse
        for mc in (1, 2, 4)
    ]
    assert sses[0] >= sses[1] >= sses[2]


def test_joint_fit_pins_to_bound_when_truth_excluded():
    curve = _curve(4e6, 12.63e-6, 0.12e-6)
    ds = ExperimentDataset("pin", RAMP, curve)
    cfg = JointFitConfig(rabi_bounds=(1e5, 2e6), max_cycles=60)
    result = joint_fit([ds], cfg, SIM)
    assert result.converged
    assert result.per_dataset[0].rabi > 0.98 * 2e6  # parked at the upper bound
    assert result.sse > 1e-3  # far worse than the perfect-model floor


def test_joint_fit_input_validation():
    with pytest.raises(ValueError, match="at least one dataset"):
        joint_fit([], JointFitConfig(), SIM)
    times = np.array([1e-6, 2e-6])
    r1 = ExperimentDataset("a", times, [0.1, 0.2], is_reference=True)
    r2 = ExperimentDataset("b", times, [0.1, 0.2], is_reference=True)
    with pytest.raises(ValueError, match="at most one reference"):
        joint_fit([r1, r2], JointFitConfig(), SIM)
    with pytest.raises(ValueError, match="one rabi and one t2"):
        evaluate_joint_sse([r1], 1e-5, [1e6, 2e6], [1e-7], SIM)


def test_joint_fit_config_validation():
    with pytest.raises(ValueError):
        JointFitConfig(rabi_bounds=(5e7, 1e5))
    with pytest.raises(ValueError):
        JointFitConfig(gamma2_bounds=(-1.0, 1e8))
    with pytest.raises(ValueError):
        JointFitConfig(max_cycles=0)
    with pytest.raises(ValueError):
        JointFitConfig(coordinate_tolerance=0.0)


# ---------------------------------------------------------------------------
# exponential decay fit
# ---------------------------------------------------------------------------


def test_exponential_fit_noiseless_recovery():
    t = np.linspace(0.0, 40e-6, 20)
    v = 0.04 * np.exp(-t / 12.48e-6)
    r = fit_exponential_decay(t, v)
    assert isinstance(r, DecayFitResult)
    assert r.tau == pytest.approx(12.48e-6, rel=1e-9)
    assert r.amplitude == pytest.approx(0.04, rel=1e-9)
    assert r.sigma_tau < 1e-12
    assert r.residual_norm < 1e-12
    assert r.offset == 0.0


def test_exponential_fit_with_offset():
    t = np.linspace(0.0, 40e-6, 20)
    v = 0.04 * np.exp(-t / 12.48e-6) + 0.01
    r = fit_exponential_decay(t, v, with_offset=True)
    assert r.tau == pytest.approx(12.48e-6, rel=1e-8)
    assert r.offset == pytest.approx(0.01, rel=1e-6)
    # without the offset term the bare exponential cannot fit this data
    r_bare = fit_exponential_decay(t, v)
    assert r_bare.residual_norm > 1e-3


def test_exponential_fit_uncertainty_tracks_noise():
    # same noise realization scaled by two -> sigma_tau close to doubled
    t = np.linspace(0.0, 40e-6, 20)
    v = 0.04 * np.exp(-t / 12.48e-6)
    noise = np.random.default_rng(11).normal(0.0, 0.002, t.shape)
    r1 = fit_exponential_decay(t, v + noise)
    r2 = fit_exponential_decay(t, v + 2.0 * noise)
    assert r1.sigma_tau > 0
    assert 1.8 < r2.sigma_tau / r1.sigma_tau < 2.2


def test_exponential_fit_errors():
    t = np.linspace(0.0, 1.0, 10)
    with pytest.raises(FitError, match="constant"):
        fit_exponential_decay(t, np.full(10, 0.3))
    with pytest.raises(ValueError, match="at least 3"):
        fit_exponential_decay([0.0, 1.0], [1.0, 0.5])
    with pytest.raises(ValueError, match="at least 4"):
        fit_exponential_decay([0.0, 1.0, 2.0], [1.0, 0.5, 0.4], with_offset=True)
    # steeply growing data drives the tau iterate negative
    with pytest.raises(FitError, match="non-positive"):
        fit_exponential_decay(t, 0.1 * np.exp(+t / 0.05))


# ---------------------------------------------------------------------------
# averaged collection-window decay
# ---------------------------------------------------------------------------


def test_averaged_params_harmonic_identity():
    p = AveragedDecayParams(amplitude=0.17, tau1=12.63e-6, tau2=0.26e-6)
    assert 1.0 / p.tau_eff == pytest.approx(1.0 / p.tau1 + 1.0 / p.tau2, rel=1e-14)
    assert p.tau_eff < min(p.tau1, p.tau2)
    assert p.tau_eff == pytest.approx(2.54755624515128e-7, rel=1e-12)
    with pytest.raises(ValueError):
        AveragedDecayParams(0.1, -1e-6, 1e-6)
    with pytest.raises(ValueError):
        AveragedDecayParams(0.1, 1e-6, 0.0)


def test_averaged_contrast_values_and_stability():
    p = AveragedDecayParams(amplitude=0.17, tau1=12.63e-6, tau2=0.26e-6)
    tau = p.tau_eff
    assert averaged_contrast(tau, p) == pytest.approx(0.1074604950008548, rel=1e-12)
    # small-window limit: at T = tau*1e-12 the average equals A outright...
    assert averaged_contrast(tau * 1e-12, p) == pytest.approx(0.17, rel=1e-9)
    # ...and at T = tau/1000 it matches the series value A*(1 - x/2 + ...)
    x = 1e-3
    series = 0.17 * (1.0 - x / 2.0 + x * x / 6.0 - x**3 / 24.0)
    assert averaged_contrast(tau / 1000.0, p) == pytest.approx(series, rel=1e-9)
    # strictly decreasing in T, supremum at T -> 0+
    grid = np.geomspace(tau / 100.0, 100.0 * tau, 41)
    vals = averaged_contrast(grid, p)
    assert np.all(np.diff(vals) < 0.0)
    assert np.all(vals < 0.17)
    with pytest.raises(ValueError):
        averaged_contrast(0.0, p)
    with pytest.raises(ValueError):
        averaged_contrast(-1e-9, p)


def test_fit_averaged_decay_round_trip():
    truth = AveragedDecayParams(amplitude=0.17, tau1=12.63e-6, tau2=0.56e-6)
    T = np.geomspace(20e-9, 5e-6, 15)
    vals = averaged_contrast(T, truth)
    fitted = fit_averaged_decay(T, vals, tau1_fixed=12.63e-6)
    assert fitted.tau2 == pytest.approx(0.56e-6, rel=1e-6)
    assert fitted.amplitude == pytest.approx(0.17, rel=1e-6)
    assert fitted.tau1 == 12.63e-6
    # with 0.5%-of-peak noise the round trip stays within 5%
    rng = np.random.default_rng(8)
    noisy = vals + rng.normal(0.0, 0.005 * vals.max(), vals.shape)
    refit = fit_averaged_decay(T, noisy, tau1_fixed=12.63e-6)
    assert abs(refit.tau2 - 0.56e-6) / 0.56e-6 < 0.05


def test_fit_averaged_decay_inconsistency():
    # data with no protocol decay at all: tau_eff == tau1, so tau2 diverges
    pure = AveragedDecayParams(amplitude=0.17, tau1=12.63e-6, tau2=1e9)
    T = np.geomspace(20e-9, 5e-6, 15)
    vals = averaged_contrast(T, pure)
    with pytest.raises(InconsistentDecayError):
        fit_averaged_decay(T, vals, tau1_fixed=12.63e-6)
    assert issubclass(InconsistentDecayError, FitError)


def test_fit_averaged_decay_errors():
    T = np.geomspace(20e-9, 5e-6, 10)
    with pytest.raises(FitError, match="constant"):
        fit_averaged_decay(T, np.full(10, 0.1), tau1_fixed=12.63e-6)
    with pytest.raises(ValueError, match="at least 3"):
        fit_averaged_decay([1e-6, 2e-6], [0.2, 0.1], tau1_fixed=12.63e-6)
    with pytest.raises(ValueError, match="tau1_fixed"):
        fit_averaged_decay(T, np.linspace(0.2, 0.1, 10), tau1_fixed=0.0)
    with pytest.raises(ValueError, match="> 0"):
        fit_averaged_decay(
            np.linspace(0.0, 1e-6, 10), np.linspace(0.2, 0.1, 10),
            tau1_fixed=12.63e-6,
        )