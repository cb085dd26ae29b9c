from .plan import DEFAULT_BOUND, OrderBound, get_plan
from .engine import (JetTable, ScalarJet, active_backend, eval_jet,
                     eval_jet_batch, eval_scalar_jet,
                     jet_conjugation_residual, set_backend)

__all__ = [
    "DEFAULT_BOUND",
    "OrderBound",
    "get_plan",
    "JetTable",
    "ScalarJet",
    "active_backend",
    "eval_jet",
    "eval_jet_batch",
    "eval_scalar_jet",
    "jet_conjugation_residual",
    "set_backend",
]
