"""Constant-angle (helix) surfaces in the Berger-deformed anti-de Sitter space H^3_{1,tau}.

Modules:
    paraquaternion: split-quaternion algebra on R^4_2.
    ambient: the quadric model, its frame, metric, connection and curvature.
    surface: numerical extrinsic geometry of immersions.
    helix_gen: generating curves, isometry families and surface assembly.
    verify: structured verification reports.
    cli: the ``ads-helix`` command.
"""

from .ambient import AmbientParams
from .errors import (
    AdsHelixError,
    ConstraintSingularityError,
    DegenerateSurfaceError,
    DomainError,
    FiniteDifferenceError,
    HopfTubeError,
    MembershipError,
    ParameterError,
)
from .helix_gen import Case, SurfaceParams, admissible_family, assemble, classify_case
from .verify import ambient_selftest, verify_surface

__version__ = "0.1.0"

__all__ = [
    "AmbientParams",
    "SurfaceParams",
    "Case",
    "classify_case",
    "admissible_family",
    "assemble",
    "verify_surface",
    "ambient_selftest",
    "AdsHelixError",
    "ParameterError",
    "MembershipError",
    "FiniteDifferenceError",
    "DomainError",
    "DegenerateSurfaceError",
    "HopfTubeError",
    "ConstraintSingularityError",
]
