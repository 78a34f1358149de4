"""Channel-extension bounds on the quantum Fisher information of noisy qubits."""

from .cebound import (
    BoundResult,
    Direction,
    GaugeHamiltonian,
    GaugeModel,
    analytic_bound,
    beta_system,
    ce_bound_general,
    compute_alpha_beta,
    minimize_alpha_norm,
    rank1_beta_sets,
    rank1_feasible,
    span_dimension,
)
from .channels import (
    KrausChannel,
    canonicalize,
    channel_from_kraus,
    make_amplitude_damping,
    make_depolarizing,
    make_pauli_channel,
    random_channel,
    rank1_params,
    validate_channel,
)
from .errors import (
    AllInfeasible,
    CeqfiError,
    DegenerateChannel,
    DimensionMismatch,
    InvalidProbabilities,
    NonHermitian,
    NotCovariant,
    OutOfDisk,
    OutOfDomain,
    OutOfRange,
    ParseError,
    SolverStall,
    UpperHemisphere,
    ValidationError,
    WrongRank,
)
from .oracle import NQubitState, apply_local_channel, effective_size, ghz, plus, qfi, verify_ce_bound
from .sweep import SweepGrid, inverse_stereographic, neff_bound, stereographic, sweep_directions

__version__ = "0.1.0"

__all__ = [
    "AllInfeasible",
    "BoundResult",
    "CeqfiError",
    "DegenerateChannel",
    "DimensionMismatch",
    "Direction",
    "GaugeHamiltonian",
    "GaugeModel",
    "InvalidProbabilities",
    "KrausChannel",
    "NQubitState",
    "NonHermitian",
    "NotCovariant",
    "OutOfDisk",
    "OutOfDomain",
    "OutOfRange",
    "ParseError",
    "SolverStall",
    "SweepGrid",
    "UpperHemisphere",
    "ValidationError",
    "WrongRank",
    "analytic_bound",
    "apply_local_channel",
    "beta_system",
    "canonicalize",
    "ce_bound_general",
    "channel_from_kraus",
    "compute_alpha_beta",
    "effective_size",
    "ghz",
    "inverse_stereographic",
    "make_amplitude_damping",
    "make_depolarizing",
    "make_pauli_channel",
    "minimize_alpha_norm",
    "neff_bound",
    "plus",
    "qfi",
    "random_channel",
    "rank1_beta_sets",
    "rank1_feasible",
    "rank1_params",
    "span_dimension",
    "stereographic",
    "sweep_directions",
    "validate_channel",
    "verify_ce_bound",
]
