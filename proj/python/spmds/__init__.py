"""Decentralized EV valley filling with voltage-constraint dimension reduction."""

from ._spmds import (
    Error,
    InfeasibleError,
    IoError,
    TopologyError,
    ValidationError,
    column_peaks,
    commonly_reduced,
    flops,
    graph_matrices,
    load_feeder,
    max_dimension_reduction,
    peak_preserved,
    project_box_sum,
    propose_grouping,
    run_scenario,
    validate_plan,
    validate_scenario,
)

__all__ = [
    "Error",
    "InfeasibleError",
    "IoError",
    "TopologyError",
    "ValidationError",
    "column_peaks",
    "commonly_reduced",
    "flops",
    "graph_matrices",
    "load_feeder",
    "max_dimension_reduction",
    "peak_preserved",
    "project_box_sum",
    "propose_grouping",
    "run_scenario",
    "validate_plan",
    "validate_scenario",
]
