"""screenwave: Helmholtz scattering by planar screens and apertures.

Galerkin boundary integral methods assembled from Fourier-symbol
representations of the single-layer and hypersingular operators on flat
(including Cantor-prefractal) screens, with wavenumber-explicit continuity
and coercivity diagnostics.
"""

from .geometry import (Mesh, Screen, build_mesh, cantor_prefractal,
                       dist_to_screen, make_screen)
from .sobolev import (Density, GramMatrix, WaveContext, cutoff_extension_norm,
                      discrete_dual_norm, gram, hsk_norm, rhs_functional)

__version__ = "0.1.0"

__all__ = [
    "Density", "GramMatrix", "Mesh", "Screen", "WaveContext", "build_mesh",
    "cantor_prefractal", "cutoff_extension_norm", "discrete_dual_norm",
    "dist_to_screen", "gram", "hsk_norm", "make_screen", "rhs_functional",
    "__version__",
]
