"""Exact and numeric verification toolkit for a self-dual Airy-type Calogero-Moser system.

Modules: ``algebra`` (exact polynomials and rational functions), ``diffop``
(differential operators), ``intertwiner`` (ansatz solver), ``eigenring``
(exact eigenfunction checks), ``numerics`` (Airy values, finite
differences), ``dynamics`` (classical particle flow) and ``cli``.
"""

from .algebra import CubicExt, MPoly, PoleError, Q, RatFn, poly_gcd, swap_xz
from .diffop import DiffOp, make_standard, op_commutator, op_compose, op_symbol
from .intertwiner import AnsatzSpec, known_intertwiner, solve_intertwiner, verify_intertwine

__version__ = "0.1.0"

__all__ = [
    "Q",
    "MPoly",
    "RatFn",
    "CubicExt",
    "PoleError",
    "poly_gcd",
    "swap_xz",
    "DiffOp",
    "make_standard",
    "op_compose",
    "op_commutator",
    "op_symbol",
    "AnsatzSpec",
    "known_intertwiner",
    "solve_intertwiner",
    "verify_intertwine",
]
