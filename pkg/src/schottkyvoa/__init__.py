"""Heisenberg vertex-algebra partition and correlation functions on Schottky-uniformized surfaces.

Submodules
----------
mmt : multiset permanents and MacMahon-type identities
schottky : Schottky parameters, Moebius maps and group words
moments : the moment matrix ``A`` and its vectors
forms : differentials, period matrix and prime form
partition : partition functions and independent determinant routes
correlators : genus-zero and genus-g generating functions
verify : cross-route invariant checks
cli : command-line runner
"""

from ._validation import (
    BranchWarning,
    ConvergenceError,
    DimensionError,
    DivergenceWarning,
    DomainError,
    DomainWarning,
    FactorizationError,
    PoleError,
    SchottkyError,
    SurfaceError,
)
from .estimator import SchottkyForms
from .moments import MomentSystem, auto_moment_system, det_I_minus_A
from .schottky import SchottkySurface, validate_surface

__all__ = [
    "BranchWarning",
    "ConvergenceError",
    "DimensionError",
    "DivergenceWarning",
    "DomainError",
    "DomainWarning",
    "FactorizationError",
    "MomentSystem",
    "PoleError",
    "SchottkyError",
    "SchottkyForms",
    "SchottkySurface",
    "SurfaceError",
    "auto_moment_system",
    "det_I_minus_A",
    "validate_surface",
]
