"""Method-of-images quantization of a massless scalar field with Dirichlet walls.

Regions: Minkowski space, the half-space ``z >= 0`` and the slab ``0 <= z <= d``.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    MirrorfieldError,
    ObstructionError,
    SingularConfigurationError,
    SupportError,
    ValidationError,
)
from .geometry import Box, Isometry, Region, SpacetimePoint, interval
from .testfields import (
    BumpTestFunction,
    ImageExpansion,
    TestFunction,
    WaveOperator,
    apply_P,
    eta_map,
    n_map,
    unit_bump,
)

__all__ = [
    "Box",
    "BumpTestFunction",
    "ConvergenceError",
    "ImageExpansion",
    "Isometry",
    "MirrorfieldError",
    "ObstructionError",
    "Region",
    "SingularConfigurationError",
    "SpacetimePoint",
    "SupportError",
    "TestFunction",
    "ValidationError",
    "WaveOperator",
    "apply_P",
    "eta_map",
    "interval",
    "n_map",
    "unit_bump",
]
