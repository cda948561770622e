"""Chirped I/Q baseband synthesis for linear frequency ramps.

A ramp of span ``delta_f`` over ``duration`` T, centered on the carrier
``f0`` after upconversion, is produced by the baseband phase

    phi(t) = -(dw/2)*t + (dw/(2T))*t**2,      dw = 2*pi*delta_f,

with quadrature components I = cos(phi), Q = -sin(phi) so that
I + jQ = exp(-j*phi). The instantaneous baseband frequency
phi'(t)/(2*pi) then runs linearly from -delta_f/2 to +delta_f/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChirpSpec",
    "IQWaveform",
    "chirp_phase",
    "generate_iq",
    "instantaneous_frequency",
]


@dataclass(frozen=True)
class ChirpSpec:
    """Linear chirp description: carrier f0 (Hz), span delta_f (Hz >= 0),
    duration (s > 0)."""

    f0: float
    delta_f: float
    duration: float

    def __post_init__(self) -> None:
        if self.f0 < 0:
            raise ValueError(f"f0 must be >= 0, got {self.f0}")
        if self.delta_f < 0:
            raise ValueError(f"delta_f must be >= 0, got {self.delta_f}")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


@dataclass(frozen=True)
class IQWaveform:
    """Sampled quadrature pair at a fixed rate; i[n], q[n] at t = n/sample_rate."""

    sample_rate: float
    i: np.ndarray
    q: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.i)) / self.sample_rate


def chirp_phase(t, spec: ChirpSpec):
    """Baseband phase phi(t) in rad for 0 <= t <= duration.

    Evaluated as pi*delta_f*t*(t/T - 1), which is the same polynomial but
    exactly zero at both ends. Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > spec.duration):
        raise ValueError(
            f"t must lie within [0, {spec.duration}] s, got values outside"
        )
    phi = math.pi * spec.delta_f * t * (t / spec.duration - 1.0)
    return phi if phi.ndim else float(phi)


def generate_iq(spec: ChirpSpec, sample_rate: float) -> IQWaveform:
    """Sample the quadrature pair (cos phi, -sin phi) of the chirp.

    Samples sit at t_n = n/sample_rate for n = 0 .. n_last, where n_last is
    the largest n with t_n <= duration. The rate must resolve the chirp:
    sample_rate >= 10*delta_f.

    Raises
    ------
    ValueError
        If the rate is non-positive or below the 10*delta_f minimum.
    """
    min_rate = 10.0 * spec.delta_f
    if sample_rate <= 0.0 or sample_rate < min_rate:
        raise ValueError(
            f"sample_rate {sample_rate} Hz is too low; need at least "
            f"{min_rate} Hz (10x delta_f) and > 0"
        )
    n_last = int(math.floor(spec.duration * sample_rate))
    # guard the floor against 1-ulp product errors: the defining rule is
    # n/sample_rate <= duration
    while (n_last + 1) / sample_rate <= spec.duration:
        n_last += 1
    while n_last > 0 and n_last / sample_rate > spec.duration:
        n_last -= 1
    t = np.arange(n_last + 1) / sample_rate
    phi = math.pi * spec.delta_f * t * (t / spec.duration - 1.0)
    return IQWaveform(sample_rate=sample_rate, i=np.cos(phi), q=-np.sin(phi))


def instantaneous_frequency(t, spec: ChirpSpec):
    """Baseband and upconverted instantaneous frequency at time ``t``.

    Returns the pair (f_baseband, f0 + f_baseband) in Hz with
    f_baseband(t) = delta_f*(t/duration - 1/2); the endpoints are exactly
    -/+ delta_f/2 around the carrier. Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > spec.duration):
        raise ValueError(
            f"t must lie within [0, {spec.duration}] s, got values outside"
        )
    baseband = spec.delta_f * (t / spec.duration - 0.5)
    if baseband.ndim:
        return baseband, spec.f0 + baseband
    return float(baseband), float(spec.f0 + baseband)
