"""Corner scattering toolkit: exact polynomial algebra, vector wavefunctions,
admissibility classification, orthant Laplace transforms, CGO solutions and
numerical checks of the corner argument."""

__version__ = "0.1.0"
