"""focklab: entanglement and number super-selection diagnostics on truncated
Fock spaces, with the dynamical protocols that probe them."""

from .fock import (
    BOSE,
    FERMI,
    BasisState,
    DensityOperator,
    Mode,
    ModeSystem,
    Operator,
    Partition,
    PureState,
    annihilation,
    apply_unitary,
    as_density,
    bosons,
    build_basis,
    creation,
    evolution_operator,
    expectation,
    fermions,
    number_op,
    partial_trace,
    qubits,
    tensor_embed,
    unitary_evolve,
)
from .measurement import (
    Observable,
    OutcomeDistribution,
    ZeroProbabilityError,
    cond_mean,
    cond_prob,
    cond_variance,
    conditioned_state,
    joint_prob,
    outcome_distribution,
    prob,
    spectral,
    unrecorded_state,
)
from .ssr import (
    SSRReport,
    SectorDecomposition,
    clock_prob,
    externalise,
    internalise,
    phase_state,
    qcf,
    sector_decompose,
    separable_ssr_theorem_check,
    ssr_check,
    twirl,
)
from .states import (
    MixtureComponent,
    NamedState,
    SeparableMixture,
    bell_one_boson,
    binomial_state,
    catalog,
    coherent,
    dissociation_state,
    ghz,
    mixed_N_boson,
    singlet_spin,
    two_mode_N_boson,
    two_mode_coherent_mixture,
    verstraete_state,
    werner_qudit,
)
from .witnesses import (
    CHSHSetting,
    SpinOps,
    WitnessVerdict,
    chsh,
    correlation_test,
    ghz_parity,
    particle_entanglement,
    pauli_ops,
    spin_epr,
    spin_ops,
)
from .lhv import (
    DiscreteLHVModel,
    LHVObservable,
    ghz_assignment_search,
    integral_inequality_oracle,
    lhv_chsh_bound_sweep,
    lhv_from_separable,
    lhv_joint,
    lhv_mean_product,
    sum_inequality_oracle,
)
from .dynamics import (
    BeamSplitterSpec,
    ProcessResult,
    atom_molecule_process,
    beam_splitter,
    extraction_experiment,
    ramsey_vacuum_superposition,
    ssr_propagation_check,
)

__version__ = "0.1.0"
