"""Continuous-variable steganography: eavesdropping on teleportation and dense coding in Fock space."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    CutoffMismatch,
    CutoffTooSmall,
    CvstegError,
    DimMismatch,
    DomainError,
    GridOverflow,
    InvalidState,
    ModeError,
    NonGaussianResource,
    TruncationFailure,
    ZeroTrace,
)
from .fock_core import (
    Cutoff,
    DensityOperator,
    ModeOperator,
    PureState,
    auto_cutoff,
    beamsplitter,
    displacement,
    expectation,
    partial_trace,
    tensor,
    two_mode_squeezer,
)
from .states import GkpParams, cat_odd, coherent, fock, gkp, gkp_bell, thermal, tmsv, vacuum
from .channels import ChannelSpec, compose, werner_apply, wiretap_apply
from .metrics import (
    chsh_s,
    concurrence,
    ef_from_concurrence,
    fidelity,
    fvdg_bounds,
    log_negativity,
    ppt_entangled,
    trace_distance,
    wigner,
)
from .capacities import advantage_p_max, classical_capacity, plob_rate, sdc_capacity
from .teleport import TeleportConfig, TeleportResult, bk_teleport_average, bk_teleport_shot
from .gkp_logic import Readout, bell_test, logical_pauli_expectation, tomography_2q
from .experiments import ExperimentConfig, list_experiments, run_experiment, wigner_dump

__all__ = [
    "__version__",
    "ConfigError",
    "CutoffMismatch",
    "CutoffTooSmall",
    "CvstegError",
    "DimMismatch",
    "DomainError",
    "GridOverflow",
    "InvalidState",
    "ModeError",
    "NonGaussianResource",
    "TruncationFailure",
    "ZeroTrace",
    "Cutoff",
    "DensityOperator",
    "ModeOperator",
    "PureState",
    "auto_cutoff",
    "beamsplitter",
    "displacement",
    "expectation",
    "partial_trace",
    "tensor",
    "two_mode_squeezer",
    "GkpParams",
    "cat_odd",
    "coherent",
    "fock",
    "gkp",
    "gkp_bell",
    "thermal",
    "tmsv",
    "vacuum",
    "ChannelSpec",
    "compose",
    "werner_apply",
    "wiretap_apply",
    "chsh_s",
    "concurrence",
    "ef_from_concurrence",
    "fidelity",
    "fvdg_bounds",
    "log_negativity",
    "ppt_entangled",
    "trace_distance",
    "wigner",
    "advantage_p_max",
    "classical_capacity",
    "plob_rate",
    "sdc_capacity",
    "TeleportConfig",
    "TeleportResult",
    "bk_teleport_average",
    "bk_teleport_shot",
    "Readout",
    "bell_test",
    "logical_pauli_expectation",
    "tomography_2q",
    "ExperimentConfig",
    "list_experiments",
    "run_experiment",
    "wigner_dump",
]
