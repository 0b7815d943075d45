"""Bounded symmetric domains, Jordan triple systems and squeezing functions.

Modules
-------
phjts       triple products, spectral and Pierce decompositions, rank
symdomain   domains as spectral-norm balls, boundary strata, polydisks
kobayashi   closed-form Kobayashi distances and distances to removed sets
squeezing   exact constants, removed-set bounds, Hardy-space certificates
wlc         special coordinates and Koebe lower bounds for convex bodies
cli         the ``bsdsqueeze`` command
"""
from .errors import ConsistencyError, PreconditionError, StructuralError, UnsupportedOperation
from .phjts import CartanFactor, JtsElement, spectral_decompose, spectral_norm
from .squeezing import SqueezeBound, exact_constant
from .symdomain import DomainSpec
from .wlc import ConvexBody, build_frame

__all__ = [
    "CartanFactor",
    "JtsElement",
    "DomainSpec",
    "ConvexBody",
    "SqueezeBound",
    "spectral_decompose",
    "spectral_norm",
    "exact_constant",
    "build_frame",
    "PreconditionError",
    "StructuralError",
    "UnsupportedOperation",
    "ConsistencyError",
]

__version__ = "0.1.0"
