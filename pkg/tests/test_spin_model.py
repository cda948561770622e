import math

import numpy as np
import pytest
from scipy.optimize import brentq

from lzspin.spin_model import (
    LorentzianLine,
    SpinSystemParams,
    field_for_transition,
    hyperfine_centers,
    synthesize_odmr_spectrum,
    transition_frequencies,
)


def _field_oracle(params: SpinSystemParams, target: float) -> float:
    """Invert f_minus(b0) numerically, independent of the closed form."""

    def f(b0):
        p = SpinSystemParams(
            d_gs=params.d_gs, e_gs=params.e_gs, gamma_e=params.gamma_e, b0=b0
        )
        return transition_frequencies(p)[1] - target

    return brentq(f, 0.0, 1.0, xtol=1e-15, rtol=1e-15)


class TestTransitionFrequencies:
    def test_zero_field_defaults(self):
        f_plus, f_minus = transition_frequencies(SpinSystemParams())
        assert f_plus == pytest.approx(3.53e9, rel=1e-12)
        assert f_minus == pytest.approx(3.43e9, rel=1e-12)

    def test_sum_is_twice_dgs(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            p = SpinSystemParams(b0=rng.uniform(0, 0.05))
            f_plus, f_minus = transition_frequencies(p)
            # symmetric split: sum equals 2*d_gs up to a couple of ulp
            assert abs(f_plus + f_minus - 2 * p.d_gs) <= 4 * np.spacing(f_plus)

    def test_degenerate_at_zero_splittings(self):
        p = SpinSystemParams(e_gs=0.0, b0=0.0)
        f_plus, f_minus = transition_frequencies(p)
        assert f_plus == f_minus == p.d_gs

    def test_split_when_either_term_nonzero(self):
        assert transition_frequencies(SpinSystemParams(e_gs=1e6, b0=0.0))[0] > (
            transition_frequencies(SpinSystemParams(e_gs=1e6, b0=0.0))[1]
        )
        p = SpinSystemParams(e_gs=0.0, b0=1e-3)
        f_plus, f_minus = transition_frequencies(p)
        assert f_plus > f_minus

    def test_monotone_in_field(self):
        fields = np.linspace(0.0, 0.03, 50)
        lower = [transition_frequencies(SpinSystemParams(b0=b))[1] for b in fields]
        upper = [transition_frequencies(SpinSystemParams(b0=b))[0] for b in fields]
        assert all(b < a for a, b in zip(lower, lower[1:]))
        assert all(b > a for a, b in zip(upper, upper[1:]))


class TestFieldForTransition:
    def test_against_numeric_inversion(self):
        p = SpinSystemParams()
        b0 = field_for_transition(p, 3.16e9)
        assert b0 == pytest.approx(_field_oracle(p, 3.16e9), rel=1e-9)
        assert b0 == pytest.approx(1.127856e-2, rel=1e-4)

    def test_round_trip(self):
        p = SpinSystemParams()
        for target in (3.16e9, 3.3e9, 3.0e9, 2.5e9):
            b0 = field_for_transition(p, target)
            p_at = SpinSystemParams(b0=b0)
            assert transition_frequencies(p_at)[1] == pytest.approx(
                target, rel=1e-9
            )

    def test_zero_field_boundary(self):
        p = SpinSystemParams()
        assert field_for_transition(p, p.d_gs - p.e_gs) == 0.0

    def test_infeasible_target(self):
        p = SpinSystemParams()
        with pytest.raises(ValueError, match="no field"):
            field_for_transition(p, 3.44e9)


class TestHyperfineCenters:
    def test_four_line_comb(self):
        centers = hyperfine_centers(3.16e9, 64e6, 4)
        np.testing.assert_allclose(
            centers, [3.064e9, 3.128e9, 3.192e9, 3.256e9], rtol=1e-15
        )
        # the third line is the ~3191 MHz operating point
        assert abs(centers[2] - 3.191e9) < 2e6

    def test_symmetry_and_spacing(self):
        for n in (1, 2, 3, 4, 7):
            centers = hyperfine_centers(3.16e9, 64e6, n)
            assert centers.mean() == pytest.approx(3.16e9, rel=1e-15)
            if n > 1:
                np.testing.assert_allclose(np.diff(centers), 64e6, rtol=1e-12)

    def test_single_line(self):
        np.testing.assert_array_equal(hyperfine_centers(3.2e9, 64e6, 1), [3.2e9])

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            hyperfine_centers(3.2e9, 0.0, 4)
        with pytest.raises(ValueError):
            hyperfine_centers(3.2e9, 64e6, 0)


class TestSynthesizeSpectrum:
    def test_isolated_line_profile(self):
        line = LorentzianLine(center=3.16e9, fwhm=20e6, amplitude=0.012)
        freqs = np.array([3.16e9, 3.16e9 + 10e6, 3.16e9 - 10e6, 3.16e9 + 1e9])
        vals = synthesize_odmr_spectrum([line], freqs)
        assert vals[0] == pytest.approx(0.012, rel=1e-12)
        # half maximum one half-width (fwhm/2) from center, both sides
        assert vals[1] == pytest.approx(0.006, rel=1e-9)
        assert vals[2] == pytest.approx(0.006, rel=1e-9)
        assert vals[3] < 2e-6

    def test_additive_in_lines(self):
        freqs = np.linspace(3.0e9, 3.4e9, 501)
        a = LorentzianLine(3.1e9, 25e6, 0.004)
        b = LorentzianLine(3.25e9, 30e6, 0.007)
        combined = synthesize_odmr_spectrum([a, b], freqs)
        separate = synthesize_odmr_spectrum([a], freqs) + synthesize_odmr_spectrum(
            [b], freqs
        )
        np.testing.assert_allclose(combined, separate, rtol=1e-14)

    def test_comb_peaks_near_line_centers(self):
        centers = hyperfine_centers(3.16e9, 64e6, 4)
        lines = [LorentzianLine(c, 20e6, 0.003) for c in centers]
        freqs = np.linspace(2.95e9, 3.37e9, 20001)
        spec = synthesize_odmr_spectrum(lines, freqs)
        # brute-force local maxima on a dense grid
        interior = (spec[1:-1] > spec[:-2]) & (spec[1:-1] > spec[2:])
        peak_freqs = freqs[1:-1][interior]
        assert len(peak_freqs) == 4
        # neighbor lines pull peaks slightly inward; 2 MHz covers it
        np.testing.assert_allclose(peak_freqs, centers, atol=2e6)

    def test_nonnegative_and_zero_without_lines(self):
        freqs = np.linspace(3.0e9, 3.4e9, 101)
        np.testing.assert_array_equal(synthesize_odmr_spectrum([], freqs), 0.0)
        spec = synthesize_odmr_spectrum(
            [LorentzianLine(3.2e9, 10e6, 0.01)], freqs
        )
        assert (spec >= 0).all()

    def test_line_validation(self):
        with pytest.raises(ValueError):
            LorentzianLine(center=0.0, fwhm=1e6, amplitude=0.01)
        with pytest.raises(ValueError):
            LorentzianLine(center=3.2e9, fwhm=0.0, amplitude=0.01)
        with pytest.raises(ValueError):
            LorentzianLine(center=3.2e9, fwhm=1e6, amplitude=-0.01)
