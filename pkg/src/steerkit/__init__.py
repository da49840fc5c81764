"""Bounds on the entanglement needed to create quantum steering assemblages."""

from .assemblage import (
    Assemblage, RewiringMap, assemblage_norm, bell_xz_assemblage, distance, marginal,
    rewire, tensor_power, uniform_assemblage, validate,
)
from .errors import BudgetError, ConstraintError, ShapeError, SolverError, SteerkitError
from .keyrate import key_rate_lower_bound
from .lhs import esw_upper_bound, is_unsteerable, restricted_sw_oracle, steering_weight
from .qubit import RestrictedAssemblage, from_bloch, is_extremal, to_bloch
from .realization import canonical_realization, marginal_entropy_bound, werner_assemblage

__version__ = "0.1.0"

__all__ = [
    "Assemblage", "RewiringMap", "assemblage_norm", "bell_xz_assemblage", "distance", "marginal",
    "rewire", "tensor_power", "uniform_assemblage", "validate",
    "BudgetError", "ConstraintError", "ShapeError", "SolverError", "SteerkitError",
    "key_rate_lower_bound", "esw_upper_bound", "is_unsteerable", "restricted_sw_oracle",
    "steering_weight", "RestrictedAssemblage", "from_bloch", "is_extremal", "to_bloch",
    "canonical_realization", "marginal_entropy_bound", "werner_assemblage",
]
