"""Chirped-drive two-level simulation, analytics and fitting toolkit."""

from .fitting import (
    AveragedDecayParams,
    DatasetFit,
    DecayFitResult,
    ExperimentDataset,
    FitError,
    InconsistentDecayError,
    JointFitConfig,
    JointFitResult,
    averaged_contrast,
    contrast,
    evaluate_joint_sse,
    fit_averaged_decay,
    fit_exponential_decay,
    joint_fit,
    normalize_by_reference,
)
from .lindblad import (
    FIT_INTEGRATOR,
    DensityMatrix,
    DriveProtocol,
    IntegrationError,
    IntegratorConfig,
    RelaxationParams,
    Trajectory,
    evolve,
    hamiltonian_at,
    make_sweep_simulator,
    simulate_schedule,
    transition_probability,
)
from .lz_analytics import (
    SweepParams,
    nominal_rabi,
    p2_coherent,
    p2_dephased,
    p_lz,
    pi_pulse_duration,
    sweep_rate,
)
from .spin_model import (
    LorentzianLine,
    SpinSystemParams,
    field_for_transition,
    hyperfine_centers,
    synthesize_odmr_spectrum,
    transition_frequencies,
)
from .waveform import (
    ChirpSpec,
    IQWaveform,
    chirp_phase,
    generate_iq,
    instantaneous_frequency,
)

__version__ = "0.1.0"

__all__ = [
    "AveragedDecayParams",
    "ChirpSpec",
    "DatasetFit",
    "DecayFitResult",
    "DensityMatrix",
    "DriveProtocol",
    "ExperimentDataset",
    "FIT_INTEGRATOR",
    "FitError",
    "InconsistentDecayError",
    "IQWaveform",
    "IntegrationError",
    "IntegratorConfig",
    "JointFitConfig",
    "JointFitResult",
    "LorentzianLine",
    "RelaxationParams",
    "SpinSystemParams",
    "SweepParams",
    "Trajectory",
    "averaged_contrast",
    "chirp_phase",
    "contrast",
    "evaluate_joint_sse",
    "evolve",
    "field_for_transition",
    "fit_averaged_decay",
    "fit_exponential_decay",
    "generate_iq",
    "hamiltonian_at",
    "hyperfine_centers",
    "instantaneous_frequency",
    "joint_fit",
    "make_sweep_simulator",
    "nominal_rabi",
    "p2_coherent",
    "p2_dephased",
    "p_lz",
    "pi_pulse_duration",
    "simulate_schedule",
    "synthesize_odmr_spectrum",
    "sweep_rate",
    "transition_frequencies",
    "transition_probability",
]
