"""Long-time asymptotics toolkit for a fourth-order dispersive NLS equation
with nonzero boundary conditions: direct scattering, Riemann-Hilbert
deformation machinery, theta-function model reconstruction, and a
pseudospectral evolution lab for cross-validation."""

__version__ = "0.1.0"
