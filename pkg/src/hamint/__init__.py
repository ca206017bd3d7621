"""Differential-algebra engine for fifth-order Hamiltonian equations u_t = D_x(δH/δu)."""

from .calculus import Flow, dt_along, euler, frechet, partial, total_x
from .densities import DensityChain, normalize_leading, recurrence_step, rho0_rho1_closed, rho_minus1
from .exactness import extract_constraints, ideal_contains, is_exact
from .expr import Expression, ExpressionError, const, jet, param, radical, x_var
from .hamiltonian import (
    HamiltonianValue,
    PointTransformation,
    TransformError,
    equivalent,
    flow_of,
    transform_dilate,
    transform_galilean,
    transform_point,
    transform_shift,
)
from .integrability import (
    ConditionReport,
    check_conditions,
    check_conditions_parametric,
    commutator,
    is_symmetry,
)
from .parsing import ParseError, parse, to_text

__version__ = "0.1.0"
