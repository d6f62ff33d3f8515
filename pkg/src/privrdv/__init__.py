"""Randomized-scheduling rendezvous: simulator, privacy calibration, audits."""

__version__ = "0.1.0"

from .graph import (
    Graph,
    DerivedGraphQuantities,
    validate_graph,
    derive_quantities,
    augmented_transition_matrix,
    ergodicity_coefficient,
)
from .dynamics import (
    AgentParams,
    SimState,
    TrajectoryRecord,
    disagreement,
    run,
    step,
    sample_initial_states,
)
from .calibration import (
    PrivacyBudget,
    CalibrationInputs,
    chi2_2_cdf,
    chi2_2_quantile,
    coverage_given_first_send,
    delta_series_bound,
    calibrate_design_rule,
    amplification_gap,
)
from .leakage import (
    EavesdropperView,
    InnovationSequence,
    PosteriorSummary,
    innovation_transform,
    reconstruct_view,
    initial_state_posterior,
    pointwise_leakage,
    monte_carlo_audit,
)
from .convergence import (
    window_noise_bound,
    all_transmit_probability,
    gaussian_max_check,
    contraction_check,
    rendezvous_check,
)
from .config import ScenarioConfig, ConfigError, load_config, bundled_scenario_path

__all__ = [
    "__version__",
    "Graph", "DerivedGraphQuantities", "validate_graph", "derive_quantities",
    "augmented_transition_matrix", "ergodicity_coefficient",
    "AgentParams", "SimState", "TrajectoryRecord", "disagreement", "run",
    "step", "sample_initial_states",
    "PrivacyBudget", "CalibrationInputs", "chi2_2_cdf", "chi2_2_quantile",
    "coverage_given_first_send", "delta_series_bound", "calibrate_design_rule",
    "amplification_gap",
    "EavesdropperView", "InnovationSequence", "PosteriorSummary",
    "innovation_transform", "reconstruct_view", "initial_state_posterior",
    "pointwise_leakage", "monte_carlo_audit",
    "window_noise_bound", "all_transmit_probability", "gaussian_max_check",
    "contraction_check", "rendezvous_check",
    "ScenarioConfig", "ConfigError", "load_config", "bundled_scenario_path",
]
