"""Exact Gauss-sum calculus over prime fields.

Finite-scale Gaussian Hilbert spaces with formal Euclidean/Hermitian inner
products, the Wick rotation between the two scale domains, continuum-limit
maps, and a small quantifier-eliminating expression language.
"""

from .arith import ParamSpec, Params, Phase, default_params, find_params
from .coeffring import GaussCoeff, to_complex, to_fp

__all__ = [
    "ParamSpec",
    "Params",
    "Phase",
    "GaussCoeff",
    "default_params",
    "find_params",
    "to_complex",
    "to_fp",
]
