"""A fine-grain call-by-value language with forward-mode AD.

Pipeline: ``surface.parse_program`` -> ``elaborate.elaborate_program`` ->
``typecheck`` -> ``ad.d_program`` -> ``interp.run``, with ``oracle``
checking derivatives against finite differences.
"""

from .ad import d_comp, d_ctx, d_program, d_type, d_val
from .elaborate import Program, elaborate, load_program
from .interp import Budget, DomainError, OutOfFuel, Value, apply_program, run, step
from .oracle import finite_diff, flatten, grad_check, seed, tangent_decompose
from .syntax import alpha_eq, free_vars, subst_comp, subst_val
from .typecheck import check_comp, check_val, kind_check

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "DomainError",
    "OutOfFuel",
    "Program",
    "Value",
    "alpha_eq",
    "apply_program",
    "check_comp",
    "check_val",
    "d_comp",
    "d_ctx",
    "d_program",
    "d_type",
    "d_val",
    "elaborate",
    "finite_diff",
    "flatten",
    "free_vars",
    "grad_check",
    "kind_check",
    "load_program",
    "run",
    "seed",
    "step",
    "subst_comp",
    "subst_val",
    "tangent_decompose",
]
