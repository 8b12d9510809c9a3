"""Active learning for graph node classification by feature propagation."""

from ._core import (
    Dataset,
    Model,
    FeatpropError,
    ParseError,
    IntegrityError,
    DimensionError,
    NodeIndexError,
    InfeasibleError,
    TrainingError,
    load_dataset,
    save_json,
    generate_sbm,
    normalized_adjacency,
    propagate,
    kmeans,
    kmedoids,
    kcenter,
    kmedoids_objective,
    kcenter_objective,
    train,
    load_model,
    strategies,
    select,
    macro_f1,
    micro_f1,
    accuracy,
    run_experiment,
)

__all__ = [name for name in dir() if not name.startswith("_")]
