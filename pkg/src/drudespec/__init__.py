"""Spectral theory of the TE Maxwell system at a vacuum/Drude interface.

The main entry points:

- ``MediumParams`` and ``cut_curves`` / ``classify`` for the material and
  the zone structure of the (k, lambda) plane;
- ``GreenFunction`` and ``resolvent_quadform`` for the reduced resolvent;
- ``ModeField`` for the generalized eigenfunctions;
- ``GeneralizedFourierTransform`` (or ``forward`` / ``adjoint``) for the
  diagonalizing transform;
- ``free_evolve`` / ``driven_evolve`` for time evolution;
- ``discretize`` / ``integrate`` for the finite-difference oracle.
"""

from .dispersion import classify, cut_curves
from .errors import ConfigError, DomainError, InstabilityError, SingularityError
from .evolution import DriveSpec, driven_evolve, evolve_2d, free_evolve, phi_omega
from .fields import StateField1D, collocated_layout, staggered_layout
from .material import MediumParams
from .modes import ModeField, mode_field
from .oracle import discretize, integrate, stone_interval, stone_point
from .sturm import GreenFunction, green, resolvent_quadform
from .transform import GeneralizedFourierTransform, adjoint, forward, spectral_grid
from .zones import Zone, ZoneKind

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "DriveSpec",
    "GeneralizedFourierTransform",
    "GreenFunction",
    "InstabilityError",
    "MediumParams",
    "ModeField",
    "SingularityError",
    "StateField1D",
    "Zone",
    "ZoneKind",
    "adjoint",
    "classify",
    "collocated_layout",
    "cut_curves",
    "discretize",
    "driven_evolve",
    "evolve_2d",
    "forward",
    "free_evolve",
    "green",
    "integrate",
    "mode_field",
    "phi_omega",
    "resolvent_quadform",
    "spectral_grid",
    "staggered_layout",
    "stone_interval",
    "stone_point",
]
