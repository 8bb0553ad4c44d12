"""Numerical workbench for nodal sets of Dirichlet eigenfunctions on
quasiconvex planar domains."""

__version__ = "0.1.0"
