"""Output field-quadrature variances for cavity QED at arbitrary coupling."""

from .operators import (
    DensityMatrix,
    DimensionError,
    QOperator,
    SpaceSpec,
    StateVector,
    annihilation,
    basis_state,
    commutator,
    embed,
    expectation,
    identity,
    tensor,
    three_level_ops,
    two_level_ops,
)
from .models import (
    CascadeParams,
    DriveSpec,
    GaussianPulse,
    RabiParams,
    build_cascade,
    build_rabi,
    drive_term,
    parity_operator,
)
from .spectrum import (
    DressedDecomposition,
    Spectrum,
    diagonalize,
    effective_splitting,
    ground_coefficients,
    positive_part,
    state_coefficients,
)
from .dynamics import (
    DissipationChannel,
    Jump,
    JumpSet,
    NumericalAbort,
    Trajectory,
    build_jumps,
    evolve,
    evolve_state,
    levels_within,
    lindblad_rhs,
)
from .observables import (
    ReferenceFrame,
    SweepResult,
    VarianceRecord,
    ground_quadrature_variance,
    ground_variance_map,
    output_variances,
    photon_flux,
    state_variances,
)

__version__ = "0.1.0"
