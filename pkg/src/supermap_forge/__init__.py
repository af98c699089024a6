"""Block Choi operators for channels between multimatrix algebras,
deterministic supermap verification, and constructive circuit realisation."""

from .algebra import (
    DEFAULT_TOL,
    BlockOperator,
    HybridState,
    MultiMatrixAlgebra,
    PositivityWitness,
    hs_inner,
    is_positive,
    psd_factor,
    trace,
)
from .cpmaps import (
    Channel,
    CpMap,
    KrausDecomposition,
    StinespringDilation,
    apply,
    as_channel,
    choi_from_action,
    compose,
    copy_channel,
    discard_copy_channel,
    environment_intertwiner,
    hs_dual,
    identity_channel,
    identity_cpmap,
    is_cp,
    is_tp,
    is_unital,
    kraus_from_choi,
    minimal_stinespring,
    tensor,
    trace_out_target_group,
    zero_cpmap,
)
from .errors import (
    AlgebraMismatchError,
    BoundViolatedError,
    IsometryDefectError,
    NotCompletelyPositiveError,
    NotMinimalError,
    NotPositiveError,
    NotTracePreservingError,
    NotUnitalError,
    ResidualTooLargeError,
    ShapeMismatchError,
    SingularMarginalError,
    StructureMissingError,
    SupermapForgeError,
    VerificationRequiredError,
)
from .supermap import (
    HomAlgebra,
    Lemma1Decomposition,
    Supermap,
    VerificationReport,
    apply_to_choi,
    choi_element,
    cpmap_from_element,
    extract_n,
    hom_algebra,
    identity_supermap,
    lemma1_condition_factor,
    lemma1_decompose,
    partial_trace_in,
    partial_trace_out,
    tp_residual,
    tp_section,
    traceout_kernel_basis,
    verify_deterministic,
)
from .realize import (
    CircuitRealisation,
    PaddedEnvironment,
    RealisationCheck,
    SolvedW,
    assemble_e,
    assemble_g,
    check_realisation,
    circuit_choi_action,
    circuit_supermap,
    evaluate_circuit,
    left_dilation,
    pad_environment,
    realize,
    right_dilation,
    solve_w,
)
from . import gen

__version__ = "0.1.0"
