"""Ground-state spin transition frequencies and synthetic ODMR spectra.

A spin-1 defect with zero-field splitting ``d_gs``, strain/electric-field
splitting ``e_gs`` and gyromagnetic ratio ``gamma_e`` in a static field
``b0`` aligned with the quantization axis has the two microwave transitions

    f_pm = d_gs +/- sqrt(e_gs**2 + (gamma_e*b0)**2).

Spectra are modeled as sums of Lorentzian contrast dips; hyperfine structure
appears as an evenly spaced comb of lines around a transition center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "SpinSystemParams",
    "LorentzianLine",
    "transition_frequencies",
    "field_for_transition",
    "hyperfine_centers",
    "synthesize_odmr_spectrum",
]


@dataclass(frozen=True)
class SpinSystemParams:
    """Static parameters of the spin system.

    Attributes
    ----------
    d_gs : float
        Zero-field splitting in Hz.
    e_gs : float
        Transverse splitting in Hz (>= 0).
    gamma_e : float
        Gyromagnetic ratio in Hz/T.
    b0 : float
        Static axial field in T (>= 0).
    hyperfine_spacing : float
        Spacing of the hyperfine comb in Hz.
    n_hyperfine : int
        Number of hyperfine lines (>= 1).
    """

    d_gs: float = 3.48e9
    e_gs: float = 50e6
    gamma_e: float = 28.024e9
    b0: float = 0.0
    hyperfine_spacing: float = 64e6
    n_hyperfine: int = 4

    def __post_init__(self) -> None:
        if self.d_gs <= 0:
            raise ValueError(f"d_gs must be > 0, got {self.d_gs}")
        if self.e_gs < 0:
            raise ValueError(f"e_gs must be >= 0, got {self.e_gs}")
        if self.gamma_e <= 0:
            raise ValueError(f"gamma_e must be > 0, got {self.gamma_e}")
        if self.b0 < 0:
            raise ValueError(f"b0 must be >= 0, got {self.b0}")
        if self.hyperfine_spacing <= 0:
            raise ValueError(
                f"hyperfine_spacing must be > 0, got {self.hyperfine_spacing}"
            )
        if self.n_hyperfine < 1:
            raise ValueError(f"n_hyperfine must be >= 1, got {self.n_hyperfine}")


@dataclass(frozen=True)
class LorentzianLine:
    """One Lorentzian contrast line: center and fwhm in Hz, peak amplitude."""

    center: float
    fwhm: float
    amplitude: float

    def __post_init__(self) -> None:
        if self.center <= 0:
            raise ValueError(f"center must be > 0, got {self.center}")
        if self.fwhm <= 0:
            raise ValueError(f"fwhm must be > 0, got {self.fwhm}")
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")


def transition_frequencies(params: SpinSystemParams) -> tuple[float, float]:
    """Upper and lower transition frequencies (f_plus, f_minus) in Hz.

    The pair straddles d_gs symmetrically: f_plus + f_minus = 2*d_gs, and
    f_plus = f_minus only when both e_gs and b0 vanish.
    """
    root = math.hypot(params.e_gs, params.gamma_e * params.b0)
    return params.d_gs + root, params.d_gs - root


def field_for_transition(params: SpinSystemParams, f_minus_target: float) -> float:
    """Axial field (T) that places the lower transition at ``f_minus_target``.

    Inverts f_minus = d_gs - sqrt(e_gs**2 + (gamma_e*b0)**2). The target must
    lie at or below the zero-field value d_gs - e_gs; anything above it is
    unreachable for any real field.
    """
    ceiling = params.d_gs - params.e_gs
    if f_minus_target > ceiling:
        raise ValueError(
            f"f_minus_target {f_minus_target} Hz is above the zero-field "
            f"lower transition {ceiling} Hz; no field reaches it"
        )
    delta = params.d_gs - f_minus_target
    return math.sqrt(delta * delta - params.e_gs * params.e_gs) / params.gamma_e


def hyperfine_centers(f_center: float, spacing: float, n: int) -> np.ndarray:
    """Centers of an ``n``-line comb spaced ``spacing`` around ``f_center``.

    The comb is symmetric: its mean is f_center and adjacent lines differ by
    exactly ``spacing``.
    """
    if spacing <= 0:
        raise ValueError(f"spacing must be > 0, got {spacing}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    offsets = (np.arange(n) - 0.5 * (n - 1)) * spacing
    return f_center + offsets


def synthesize_odmr_spectrum(
    lines: Sequence[LorentzianLine], freqs: np.ndarray
) -> np.ndarray:
    """Composite contrast spectrum: sum of Lorentzians over ``freqs``.

    Each line contributes amplitude * hw^2 / ((f - center)^2 + hw^2) with
    hw = fwhm/2, so an isolated line peaks at its amplitude and falls to
    half of it one hw away from center.
    """
    freqs = np.asarray(freqs, dtype=float)
    out = np.zeros_like(freqs)
    for line in lines:
        hw = 0.5 * line.fwhm
        out += line.amplitude * hw * hw / ((freqs - line.center) ** 2 + hw * hw)
    return out
