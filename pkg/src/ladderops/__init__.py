"""Raising and lowering operators for the angular momentum quantum number l.

Matrix realizations over a truncated spherical-harmonic basis, a catalog of the
commutation identities they satisfy, lowest-state kernels and generation of the
full harmonic set from |0,0>.
"""

from .basis import (
    BasisSpec,
    CoeffVector,
    ModeIndex,
    QuadratureGrid,
    analyze,
    build_grid,
    eval_harmonic,
    mode_index,
    synthesize,
)
from .errors import (
    CatalogError,
    ConsistencyError,
    DomainError,
    LadderOpsError,
    NumericDomainError,
    PreconditionError,
)
from .ladder import (
    GeneratedState,
    KernelSolution,
    generate_all,
    generate_state,
    joint_kernel,
    kernel_basis,
    lowest_state,
)
from .operators import (
    Band,
    LadderCoefficients,
    SparseOperator,
    adjoint,
    build_analytic_shift,
    build_angular,
    build_direction,
    build_half_finished,
    build_kr_z,
    build_shift,
    commutator,
    spectral_fn,
)
from .verification import IdentityCheck, run_identity, run_suite

__version__ = "0.1.0"
