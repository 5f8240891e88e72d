"""Hulls of isotropic yield sets in the pressure/shear invariant plane.

The library computes the relaxed admissible region of a compact set in
the (p, q) plane (downward closure, convex hull, removal of separable
points), validates it against an independent rank-two lamination
fixpoint, lifts planar membership to full stress tensors, and
numerically certifies or falsifies candidate functions against periodic
divergence-free symmetric test fields built in Fourier space.
"""

from .tensors import (
    SymMatrix,
    PQPoint,
    Direction,
    phi,
    tartar_f,
    separator_value,
    deviator_eigen,
    eigen_sym3,
    parse_matrix,
)
from .planar import (
    Arc,
    EmptySetError,
    PlanarSet,
    Region,
    SchemaError,
    column_deviation,
    convex_hull,
    downward_closure,
    hausdorff_distance,
)
from .hull import (
    CirclePointResult,
    DegenerateTangencyError,
    DisconnectedResultWarning,
    DomainError,
    HullInfo,
    SeparationWitness,
    Tangency,
    circle_point_hull,
    hsdqc,
    is_separable,
    slope_condition,
    two_point_hull,
    two_point_psi,
)
from .curves import (
    DegenerateBaseError,
    GammaCurve,
    MatrixPath,
    NotConvergedError,
    RankTwoCurve,
    SlopeOutOfRangeError,
    TwoMatrixHull,
    gamma,
    lamination_closure,
    lift_line,
    lift_through_matrix,
    two_matrix_hull,
)
from .fields import (
    Candidate,
    FourierField,
    GridTooCoarseError,
    InequalityReport,
    NonzeroMeanError,
    NotRankDeficientError,
    Potential,
    QuadraticPotential,
    divdiv,
    lambda_direction_check,
    potential_of,
    project_divfree,
    quadratic_potential,
    random_divfree_field,
    shear_sine_mode,
    sym_det_candidate,
    tartar_candidate,
    test_inequality,
)
from .workflows import (
    MembershipVerdict,
    classify_membership,
    compute_hull,
    example_artifacts,
    oracle_compare,
)

__version__ = "0.1.0"
