"""Rate-distortion for lossy function computing with decoder side information.

An encoder observes X, a decoder observes correlated side information Y and
must reproduce f(X, Y) within an average distortion budget. The trade-off
curve R(D) is computed by alternating minimization over auxiliary channels
whose atoms are hyperedge/candidate-recovery pairs of a characteristic
multi-hypergraph; a brute-force oracle and a Monte-Carlo protocol simulator
cross-check the results.
"""

__version__ = "0.1.0"

from .errors import (
    AlphabetTooLarge,
    CheckFailed,
    CurveNotMonotone,
    DimensionMismatch,
    DomainError,
    EmptySupport,
    IndexOutOfRange,
    Infeasible,
    InstanceTooLarge,
    InvalidChannel,
    InvalidDistortionEntry,
    MembershipViolation,
    NegativeProbability,
    NotConverged,
    NotInGammaD,
    NumericalError,
    NumericalUnderflow,
    PMFNotNormalized,
    RdcompError,
    RecoverySpaceTooLarge,
    SpecFormatError,
    UnannotatedChannel,
    ValidationError,
    ZeroMarginalRow,
)
from .hypergraph import (
    CandidateRecovery,
    Hyperedge,
    HyperedgeFamily,
    MultiHyperedge,
    distortion_ball,
    enumerate_candidate_recoveries,
    enumerate_gamma_d,
    epsilon_distortion,
    format_hyperedge,
    induced_values,
    maximal_members,
    zero_distortion_recovery,
)
from .info import (
    AuxChannel,
    DecoderMap,
    binary_entropy,
    conditional_mutual_information,
    expected_distortion,
)
from .model import (
    Alphabet,
    ProblemSpec,
    builtin_spec,
    card_game_spec,
    load_spec,
    min_achievable_distortion,
    replace_distortion,
    save_spec,
    shannon_binary_spec,
    spec_to_dict,
    validate_spec,
    wyner_ziv_identity_spec,
    zero_rate_distortion,
    zero_rate_recovery,
)
from .oracle import OracleConfig, OracleReport, brute_force_rd, verify_point
from .simulate import SimulationReport, simulate_scheme
from .solver import (
    RDCurve,
    RDPoint,
    SolverConfig,
    am_step,
    attach_subset,
    decoder_from_atoms,
    lagrangian_value,
    lift_to_multihyperedge,
    prune_support,
    solve_at_distortion,
    solve_lagrangian,
    sweep_curve,
)

__all__ = [name for name in dir() if not name.startswith("_")]
