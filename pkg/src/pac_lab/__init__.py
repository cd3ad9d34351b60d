"""Triplet-comparison PAC learning: exact oracles, constructions, adversaries and bounds."""
from .core import (
    Dataset,
    Embedding,
    Label,
    LabeledSample,
    MetricTable,
    TripletQuery,
    all_queries,
    dumps,
    embedding_labels,
    labeled,
    loads,
    metric_labels,
    validate_metric,
)
from .errors import (
    BudgetExceededError,
    ContradictionError,
    DomainError,
    OptimizerError,
    PreconditionError,
    TieWarning,
)
from .experiments import EXPERIMENTS, ExperimentConfig, run
from .shattering import (
    brute_force_vcdim,
    construct_metric_for_labeling,
    construct_shattering_embedding,
    find_forcing_cycle,
    is_realizable_metric,
)

__version__ = "0.1.0"
