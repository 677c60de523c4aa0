"""Symbolic and numerical toolkit for the generalized damped Westervelt equation

    f(p)_tt - beta p_txx - c^2 p_xx = 0.

Exact jet-space algebra (``kernel``, ``parser``), the equation and its
potential systems (``systems``), point symmetries (``symmetry``),
conservation laws and multipliers (``conslaw``), travelling fronts
(``tws``) and a method-of-lines solver (``fdsim``).
"""

from .conslaw import ConsLaw, divergence_residual, find_multipliers, flux_reconstruct, multiplier_residual
from .families import FSpec
from .kernel import D, JetCoord, JetExpr, euler_operator, eval_numeric, substitute, to_string, total_derivative
from .parser import parse
from .symmetry import Generator, lie_bracket, linearize_along, project_pot2, symmetry_residual, symmetry_search
from .systems import SYSTEM_NAMES, build_system

__version__ = "0.1.0"

__all__ = [
    "ConsLaw", "D", "FSpec", "Generator", "JetCoord", "JetExpr", "SYSTEM_NAMES", "build_system",
    "divergence_residual", "euler_operator", "eval_numeric", "find_multipliers", "flux_reconstruct",
    "lie_bracket", "linearize_along", "multiplier_residual", "parse", "project_pot2", "substitute",
    "symmetry_residual", "symmetry_search", "to_string", "total_derivative",
]
