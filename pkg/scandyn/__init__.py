"""
scandyn
=======

Rigid-body dynamics of serial chains, computed both with the classic O(n)
recursions and as prefix scans over associative operators.

Author: Dynamics Engineering Team
Created: October 2026
"""

__version__ = "0.1.0"

from scandyn.exceptions import (  # noqa: E402
    DimensionMismatchError,
    ModelFormatError,
    ModelValidationError,
    ScanDynError,
    ScanError,
    SingularInertiaError,
)
from scandyn.forward_dynamics import FD_ALGORITHMS, fd_batch, forward_dynamics  # noqa: E402
from scandyn.inverse_dynamics import ID_ALGORITHMS, id_batch, inverse_dynamics  # noqa: E402
from scandyn.robot_model import ChainModel, DynamicsInput, LinkSpec, random_chain, random_input  # noqa: E402
from scandyn.scan_engine import ScanPlan, Semigroup, exclusive_scan, inclusive_scan  # noqa: E402

__all__ = [
    "ChainModel",
    "DimensionMismatchError",
    "DynamicsInput",
    "FD_ALGORITHMS",
    "ID_ALGORITHMS",
    "LinkSpec",
    "ModelFormatError",
    "ModelValidationError",
    "ScanDynError",
    "ScanError",
    "ScanPlan",
    "Semigroup",
    "SingularInertiaError",
    "exclusive_scan",
    "fd_batch",
    "forward_dynamics",
    "id_batch",
    "inclusive_scan",
    "inverse_dynamics",
    "random_chain",
    "random_input",
]
