"""2D radiative-transfer workbench.

Forward solvers for the linear and temperature-coupled transport equations
on strictly convex domains, plus the constructive recovery pipelines for
the absorption coefficient (chord probing, X-ray extraction, regularized
inversion) and the scattering coefficient (crossing-chord probe).
"""

__version__ = "0.1.0"

from .geometry import (ConvexDomain, PhasePoint, ChordRay,
                       BoundaryQuadrature, exit_time, grad_exit_time,
                       flux_identity_residual,
                       volume_from_boundary_quadrature)
from .fields import (ScalarField, CoefficientPair, Sinogram, make_phantom,
                     line_integral)
from . import errors

__all__ = [
    "ConvexDomain", "PhasePoint", "ChordRay", "BoundaryQuadrature",
    "exit_time", "grad_exit_time", "flux_identity_residual",
    "volume_from_boundary_quadrature",
    "ScalarField", "CoefficientPair", "Sinogram", "make_phantom",
    "line_integral", "errors", "__version__",
]
