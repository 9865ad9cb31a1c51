"""Simulator for sequential atom-cavity protocols that entangle the modes of
two separated cavities.

A classically driven two-level atom crosses cavity A and then cavity B.
Depending on how the cavity detunings relate to the drive Rabi frequency,
the effective dynamics in each cavity is a conditional displacement, a
dressed-basis excitation exchange, or a dressed-basis co-creation coupling;
chaining two legs and measuring the atom leaves the two cavity fields in an
entangled coherent superposition or in a Bell state.

The package provides the truncated-space linear algebra (:mod:`.hilbert`),
every Hamiltonian of the scheme (:mod:`.models`), exact and time-dependent
propagators plus a damping channel (:mod:`.propagate`), the end-to-end
protocols (:mod:`.protocols`), state diagnostics (:mod:`.measures`), an
invariant suite (:mod:`.validate`) and a batch CLI (:mod:`.cli`).
"""

from .errors import (
    CavityLinkError,
    ConfigurationError,
    ContractViolationError,
    ConvergenceError,
    DimensionMismatchError,
    IntegrationError,
    TruncationError,
    UnsupportedConfigurationError,
)
from .hilbert import (
    FieldState,
    Operator,
    PureState,
    SystemDims,
    atomic_op,
    coherent_amplitudes,
    coherent_state,
    default_truncation,
    displacement_op,
    fock_state,
    ladder_op,
    leakage,
)
from .measures import (
    TwoQubitState,
    cat_parity_overlap,
    cavity_marginal,
    concurrence,
    fidelity,
    fidelity_to_pure,
    reduce_to_qubits,
    reduced_atom_purity,
)
from .models import (
    HarmonicHamiltonian,
    ModelKind,
    ProtocolParams,
    dressed_ajc_hamiltonian,
    dressed_jc_hamiltonian,
    effective_hamiltonian,
    frame_generator,
    frame_transform,
    interaction_generator,
    interaction_hamiltonian,
    lab_hamiltonian,
    rotating_hamiltonian,
)
from .propagate import (
    DensityMatrix,
    EvolutionInfo,
    NoiseParams,
    conditional_displacement,
    evolve_lindblad,
    evolve_time_dependent,
    evolve_unitary,
)
from .protocols import (
    DecoherenceBudget,
    Engine,
    MeasurementBranch,
    ProtocolKind,
    RunResult,
    auto_dims,
    bell_even_target,
    bell_odd_target,
    bell_params,
    ecs_branch_target,
    ecs_joint_target,
    ecs_normalization,
    ecs_params,
    expected_branch,
    measure_atom,
    run_bell_even,
    run_bell_odd,
    run_decoherence_budget,
    run_entangled_coherent,
    run_protocol,
)

__version__ = "0.1.0"
