from ._core import (
    CapacityError,
    EnsembleSpec,
    NumericFailure,
    cycle_types,
    dos,
    estimate_beta_c,
    gibbs_weights,
    ground_state_bound,
    interaction_sets,
    internal_energy,
    purity,
    purity_beta_derivative,
    run_sweep,
    sample_energies,
    sample_hamiltonian,
    symmetric_dimension,
    threshold_temperature,
)

__all__ = [
    "CapacityError",
    "EnsembleSpec",
    "NumericFailure",
    "cycle_types",
    "dos",
    "estimate_beta_c",
    "gibbs_weights",
    "ground_state_bound",
    "interaction_sets",
    "internal_energy",
    "purity",
    "purity_beta_derivative",
    "run_sweep",
    "sample_energies",
    "sample_hamiltonian",
    "symmetric_dimension",
    "threshold_temperature",
]
