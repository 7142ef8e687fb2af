"""Radial harmonic analysis on real hyperbolic spaces and their products.

The package bundles five coupled toolboxes:

* ``spaces``       -- geometry of H^n and products (root data, polar density,
                      Riemannian / polyhedral distances, ball volumes)
* ``spherical``    -- spherical functions, Plancherel density, and the radial
                      (spherical) transform pair with numeric calibration
* ``kernels``      -- Bessel-Green-Riesz kernels, fractional operators,
                      Sobolev norms, radial convolution, regime diagnostics
* ``hardy``        -- weighted integral Hardy machinery (U, V, D1-D5 and the
                      adjoint variants, empirical inequality testing)
* ``inequalities`` -- admissibility checks and empirical ratio verification
                      for Stein-Weiss / HLS / Hardy-Sobolev / Hardy /
                      uncertainty / Sobolev / Gagliardo-Nirenberg / CKN
* ``wave``         -- spectral solver for the damped, massive wave equation
                      with exact linear propagation and Duhamel stepping

``hyplab.cli`` exposes everything as a command line tool; see README.md.
"""

from .spaces import SpaceModel, ChamberPoint, make_hyperbolic, make_product

__version__ = "0.1.0"

__all__ = [
    "SpaceModel",
    "ChamberPoint",
    "make_hyperbolic",
    "make_product",
    "__version__",
]
