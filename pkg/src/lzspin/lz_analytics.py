"""Closed-form expressions for linear-ramp avoided-crossing dynamics.

Everything in this module is analytic; the numerically integrated
counterparts live in :mod:`lzspin.lindblad` and are checked against these
formulas in the test suite. Public interfaces take ordinary (cyclic)
frequencies in Hz; angular quantities are formed internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SweepParams",
    "sweep_rate",
    "p_lz",
    "p2_coherent",
    "p2_dephased",
    "pi_pulse_duration",
    "nominal_rabi",
]


@dataclass(frozen=True)
class SweepParams:
    """One linear frequency ramp.

    Attributes
    ----------
    rabi : float
        Drive Rabi frequency in Hz (>= 0). This is the cyclic frequency:
        a resonant pi pulse takes 1/(2*rabi).
    delta_f : float
        Full ramp span in Hz (> 0).
    sweep_time : float
        Ramp duration in seconds (> 0).
    """

    rabi: float
    delta_f: float
    sweep_time: float

    def __post_init__(self) -> None:
        if self.rabi < 0:
            raise ValueError(f"rabi must be >= 0, got {self.rabi}")
        if self.delta_f <= 0:
            raise ValueError(f"delta_f must be > 0, got {self.delta_f}")
        if self.sweep_time <= 0:
            raise ValueError(f"sweep_time must be > 0, got {self.sweep_time}")


def sweep_rate(params: SweepParams) -> float:
    """Angular detuning ramp rate alpha = 2*pi*delta_f/sweep_time (rad/s^2)."""
    return 2.0 * math.pi * params.delta_f / params.sweep_time


def p_lz(rabi: float, alpha: float) -> float:
    """Asymptotic single-passage transfer probability for a linear ramp.

    Unit audit
    ----------
    The drive enters the two-level Hamiltonian as -(W/2)*sigma_x with
    W = 2*pi*rabi, so the off-diagonal matrix element is W/2 and the
    avoided-crossing gap is W. For a detuning ramped at alpha = dA/dt the
    diabatic survival probability is exp(-2*pi*(W/2)**2/alpha), hence

        P = 1 - exp(-2*pi*(pi*rabi)**2 / alpha).

    The square in the exponent acts on the *off-diagonal element* (half the
    angular Rabi frequency), not on the full gap; mixing the two conventions
    changes the exponent by a factor of 4.

    Parameters
    ----------
    rabi : float
        Rabi frequency in Hz (>= 0).
    alpha : float
        Angular sweep rate in rad/s^2 (> 0).

    Returns
    -------
    float
        Transfer probability; 0 at rabi=0, approaching 1 as alpha -> 0+.
    """
    if rabi < 0:
        raise ValueError(f"rabi must be >= 0, got {rabi}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    coupling = math.pi * rabi  # off-diagonal element in rad/s
    return -math.expm1(-2.0 * math.pi * coupling * coupling / alpha)


def p2_coherent(p: float, phi: float) -> float:
    """Double-passage transfer with the inter-passage coherence fully kept.

    P2 = 4*p*(1-p)*sin(phi/2)**2 for single-passage probability ``p`` and
    accumulated inter-passage phase ``phi`` (rad). Complete transfer (P2 = 1)
    needs p = 1/2 and phi = pi.
    """
    _check_probability(p)
    s = math.sin(0.5 * phi)
    return 4.0 * p * (1.0 - p) * s * s


def p2_dephased(p: float, phi: float, t_between: float, t2: float) -> float:
    """Double-passage transfer with coherence decaying between passages.

    P2 = 2*p*(1-p)*(1 - exp(-t_between/t2)*cos(phi)). At t_between = 0 this
    is p2_coherent; for t_between >> t2 the interference term dies and the
    incoherent limit 2*p*(1-p) remains, maximal (1/2) at p = 1/2.

    Parameters
    ----------
    p : float
        Single-passage transfer probability, in [0, 1].
    phi : float
        Inter-passage phase in rad.
    t_between : float
        Time spent between the two passages, seconds (>= 0).
    t2 : float
        Coherence time in seconds (> 0; may be ``math.inf``).
    """
    _check_probability(p)
    if t_between < 0:
        raise ValueError(f"t_between must be >= 0, got {t_between}")
    if t2 <= 0:
        raise ValueError(f"t2 must be > 0, got {t2}")
    damp = math.exp(-t_between / t2)
    return 2.0 * p * (1.0 - p) * (1.0 - damp * math.cos(phi))


def pi_pulse_duration(rabi: float) -> float:
    """Resonant pi-pulse length 1/(2*rabi), seconds."""
    if rabi <= 0:
        raise ValueError(f"rabi must be > 0, got {rabi}")
    return 1.0 / (2.0 * rabi)


def nominal_rabi(pi_len: float) -> float:
    """Rabi frequency in Hz implied by a measured pi-pulse length."""
    if pi_len <= 0:
        raise ValueError(f"pi_len must be > 0, got {pi_len}")
    return 1.0 / (2.0 * pi_len)


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
