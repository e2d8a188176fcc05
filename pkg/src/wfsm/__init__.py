"""Derivative calculus and expectations for cyclic weighted finite-state machines."""

from .derivatives import (DerivativeTensor, derivative_tensor, gradient, hessian,
                          tuple_marginal, tuple_marginal_literal)
from .errors import (BudgetInsufficient, DegenerateMachine, DimensionMismatch,
                     DivergentMachine, OrderTooLarge, ParseError, SingularMatrix,
                     ValidationError, WfsmError)
from .expectations import (DecomposableFunction, ExpectationAggregates,
                           ExpectationResult, covariance, first_order_expectation,
                           second_order_expectation)
from .fileformat import (parse_function, parse_machine, serialize_function,
                         serialize_machine)
from .machine import (EPSILON, KleeneCache, Machine, Transition, build_cache,
                      machine_from_arcs, make_machine, total_matrix,
                      trajectory_probability, trajectory_weight)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
