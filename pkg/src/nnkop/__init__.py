"""Kantorovich neural-network operators activated by sigmoidal functions."""
from nnkop._backend import BACKEND
from nnkop.operators import (
    Box,
    DomainError,
    DurrmeyerKernel,
    EmptyIndexRangeError,
    IndexSet,
    MeanValueGrid,
    OperatorConfig,
    StepFunction,
    durrmeyer_eval_1d,
    index_set,
    kantorovich_apply,
    kantorovich_eval,
    mean_value_grid,
)
from nnkop.sigmoid import (
    DensityKernel,
    SigmoidFamily,
    density_eval,
    density_multi_eval,
    sigma_eval,
    truncation_radius,
)

__version__ = "0.1.0"
