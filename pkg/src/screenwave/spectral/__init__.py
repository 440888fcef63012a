"""Fourier symbols, closed-form basis transforms, and symbol quadrature."""

from .engine import (QuadratureError, SymbolKind, SymbolQuadrature, assemble,
                     assemble_mesh_matrix, basis_ft, bessel, build_quadrature,
                     gradient_dof_factors, hypersingular, mesh_dof_factors,
                     single_layer, symbol_integral, symbol_Z,
                     truncated_kernel_ft)
from .factors import AxisFactor, PairProfile, pair_profile, sinc

__all__ = [
    "AxisFactor", "PairProfile", "QuadratureError", "SymbolKind", "SymbolQuadrature",
    "assemble", "assemble_mesh_matrix", "basis_ft", "bessel",
    "build_quadrature", "gradient_dof_factors", "hypersingular",
    "mesh_dof_factors", "pair_profile", "sinc", "single_layer",
    "symbol_integral", "symbol_Z", "truncated_kernel_ft",
]
