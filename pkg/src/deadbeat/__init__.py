"""Deadbeat observers, deadbeat interconnections and synchronizing observer arrays.

Linear objects are exact: matrices are :class:`RationalMatrix` instances with
:class:`fractions.Fraction` entries.  Nonlinear agents run in floating point.
"""

from .array_sim import (
    ArraySpec,
    FamilyDynamics,
    LinearDynamics,
    SyncReport,
    Trajectory,
    build_phi,
    closed_loop_matrix,
    measure_sync,
    simulate,
    synchronization_bound,
    verify_kronecker_sync,
    verify_cube_sync,
    verify_theorem2,
    verify_theorem4,
)
from .config import ScenarioConfig, load_config
from .coupling import CouplingMatrix, deadbeat_horizon, random_coupling, validate_coupling
from .interconnect import (
    CubePowerInterconnection,
    LinearInterconnection,
    check_cube_compatibility,
    check_linear_compatibility,
    cube_interconnection,
    kron_interconnection,
    raw_linear_interconnection,
    tree_interconnection,
)
from .linear_observer import LinearDeadbeatObserver, design_observer, subspace_chain
from .matrixcore import Polynomial, RationalMatrix, charpoly, kron, matpow, nilpotency_index
from .nonlinear_systems import chaotic_family, cube_family

__version__ = "0.1.0"

__all__ = [
    "ArraySpec",
    "CouplingMatrix",
    "CubePowerInterconnection",
    "FamilyDynamics",
    "LinearDeadbeatObserver",
    "LinearDynamics",
    "LinearInterconnection",
    "Polynomial",
    "RationalMatrix",
    "ScenarioConfig",
    "SyncReport",
    "Trajectory",
    "build_phi",
    "chaotic_family",
    "charpoly",
    "check_cube_compatibility",
    "check_linear_compatibility",
    "closed_loop_matrix",
    "cube_family",
    "cube_interconnection",
    "deadbeat_horizon",
    "design_observer",
    "kron",
    "kron_interconnection",
    "load_config",
    "matpow",
    "measure_sync",
    "nilpotency_index",
    "random_coupling",
    "raw_linear_interconnection",
    "simulate",
    "subspace_chain",
    "synchronization_bound",
    "tree_interconnection",
    "validate_coupling",
    "verify_kronecker_sync",
    "verify_cube_sync",
    "verify_theorem2",
    "verify_theorem4",
]
