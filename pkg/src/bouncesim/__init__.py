"""Simulation toolkit for entanglement by cascaded dispersive measurement.

Two qubit-resonator chips share a measurement line in a bounce-bounce
configuration: a coherent pulse reflects off the first chip, acquires a
qubit-state-dependent phase, reflects off the second chip, and is finally
detected by homodyne measurement.  The joint record distinguishes parity
subspaces without resolving the individual qubits, so a suitable outcome
heralds an entangled two-qubit state.

The package solves the qubit-state-conditioned classical fields, synthesizes
weak-port compensation pulses that erase which-qubit information for a chosen
parity pair, propagates the unconditioned polaron-frame master equation and
measurement-conditioned stochastic trajectories, classifies and post-selects
integrated records, reconstructs states by maximum-likelihood tomography,
and evaluates entanglement measures and ebit rates.
"""

from .params import (
    ChipParams,
    ConfigError,
    PulseSequence,
    SystemParams,
    TimeGrid,
    default_config,
    load_config,
    serialize_config,
    smoothed_square,
)
from .fields import (
    FieldSolution,
    dephasing_integral,
    solve_fields_fourier,
    solve_fields_ode,
)
from .compensation import (
    EVEN_PAIR,
    ODD_PAIR,
    StatePair,
    matching_cost,
    optimize_params,
    synthesize_compensation,
)
from .master_eq import (
    PLUS_PLUS,
    DephasingDataset,
    PolaronCoefficients,
    dephasing_sweep,
    evolve_me,
    fit_eta_and_scale,
    polaron_coefficients,
    validate_density_matrix,
)
from .sme import (
    GaussianMixtureClassifier,
    SmeEnsemble,
    Trajectory,
    conditioned_state,
    evolve_sme,
    integrate_record,
    integration_weights,
    optimal_readout_angle,
    postselect,
    sme_ensemble,
    train_classifier,
)
from .tomography import (
    ResidualExcitation,
    TomographyDataset,
    bootstrap_errors,
    cardinal_rotations,
    reconstruct,
    simulate_tomography,
)
from .measures import (
    EntanglementReport,
    bell_fidelity,
    concurrence,
    ebit_rate,
    entanglement_report,
    log_negativity,
)
from .harness import ExperimentPlan, RunResult, emit_tables, run_full

__version__ = "0.1.0"

__all__ = [
    "ChipParams",
    "ConfigError",
    "PulseSequence",
    "SystemParams",
    "TimeGrid",
    "default_config",
    "load_config",
    "serialize_config",
    "smoothed_square",
    "FieldSolution",
    "dephasing_integral",
    "solve_fields_fourier",
    "solve_fields_ode",
    "EVEN_PAIR",
    "ODD_PAIR",
    "StatePair",
    "matching_cost",
    "optimize_params",
    "synthesize_compensation",
    "PLUS_PLUS",
    "DephasingDataset",
    "PolaronCoefficients",
    "dephasing_sweep",
    "evolve_me",
    "fit_eta_and_scale",
    "polaron_coefficients",
    "validate_density_matrix",
    "GaussianMixtureClassifier",
    "SmeEnsemble",
    "Trajectory",
    "conditioned_state",
    "evolve_sme",
    "integrate_record",
    "integration_weights",
    "optimal_readout_angle",
    "postselect",
    "sme_ensemble",
    "train_classifier",
    "ResidualExcitation",
    "TomographyDataset",
    "bootstrap_errors",
    "cardinal_rotations",
    "reconstruct",
    "simulate_tomography",
    "EntanglementReport",
    "bell_fidelity",
    "concurrence",
    "ebit_rate",
    "entanglement_report",
    "log_negativity",
    "ExperimentPlan",
    "RunResult",
    "emit_tables",
    "run_full",
    "__version__",
]
