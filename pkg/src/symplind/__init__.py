"""Quadratic bosonic Lindblad equations via symplectic normal forms.

The package diagonalizes the Liouvillian of a quadratic bosonic open
system with a single symplectic transformation, exposes its spectrum,
stability class and Jordan structure, evaluates counting statistics
through tilted generators, classifies symmetries, and ships an
independent truncated-Fock oracle for cross-validation.
"""

from .counting import (
    QuadraticObservable,
    TiltedBranchSet,
    factorial_cumulants,
    generating_function,
    ordinary_cumulants,
    photon_current_observable,
    tilt,
    track_branches,
)
from .errors import (
    BranchCollision,
    BranchCutFailure,
    ComputationError,
    DimensionMismatch,
    DriveAtCriticalMode,
    GaugeFixFailure,
    IndexOutOfRange,
    InputError,
    InsufficientGrid,
    JordanFormRequiresGeneralizedTreatment,
    ModelParseError,
    NonDiagonalizableOnPath,
    NonSymmetricInput,
    NotDiagonalizable,
    OffGrid,
    PairingFailure,
    ResidualFailure,
    ResourceLimit,
    SingularInput,
    SymplindError,
    TruncationWarning,
    UnsupportedJordanStructure,
)
from .linalg import (
    CoalescedPair,
    GeneralizedEigenSolution,
    JordanReport,
    SymplecticNormalForm,
    detect_jordan,
    generalized_eigs,
    matrix_sqrt,
    standard_symplectic_form,
    sympl_normal_form,
)
from .model import (
    DissipationMatrices,
    JumpOperator,
    LindbladModel,
    LiouvillianBlocks,
    assemble_liouvillian,
    build_dissipation,
    build_dissipation_m,
    build_drive,
    build_heff,
    build_noise,
    model_from_dict,
    model_from_json,
    validate_hermiticity_structure,
)
from .oracle import (
    OracleGenerator,
    build_oracle,
    oracle_leading_tilted_eigenvalue,
    oracle_spectrum,
    stationary_state,
)
from .symmetry import (
    PTSymmetryCandidate,
    SymmetryVerdict,
    UnitarySymmetryCandidate,
    conjugate_pairing_check,
    hermiticity_check,
    mirror_pairing_check,
    pt_candidate_from_unitary,
    pt_classification,
    pt_symmetry_check,
    unitary_symmetry_check,
)
from .thirdq import (
    StabilityReport,
    ThirdQuantizedForm,
    classify_spectrum,
    classify_stability,
    heff_eigencheck,
    jordan_evolution_coefficients,
    liouvillian_eigenvalue,
    lowest_eigenvalues,
    stationary_displacement,
    third_quantize,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
