"""Conflict management for RAN control applications.

Profiles applications as per-variable ECDFs, detects direct, parameter and
KPM conflicts over dependency graphs, scores their severity with distribution
distances, and plans deployments under an operator tolerance.
"""

from .catalog import (
    ApplicationProfile,
    Catalog,
    OperationalCondition,
    StatisticalProfile,
    VariableId,
    dump_catalog,
    load_catalog,
)
from .errors import (
    CatalogError,
    EvaluationError,
    GraphError,
    MitigationError,
    RanConflictError,
    ScenarioError,
)
from .kernels import BACKEND
from .statdist import (
    CategoricalDist,
    DistanceValue,
    Ecdf,
    Metric,
    build_ecdf,
    chi_distance,
    int_distance,
    ks_distance,
    sufficiency_curve,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ApplicationProfile",
    "Catalog",
    "CatalogError",
    "CategoricalDist",
    "DistanceValue",
    "Ecdf",
    "EvaluationError",
    "GraphError",
    "Metric",
    "MitigationError",
    "OperationalCondition",
    "RanConflictError",
    "ScenarioError",
    "StatisticalProfile",
    "VariableId",
    "build_ecdf",
    "chi_distance",
    "dump_catalog",
    "int_distance",
    "ks_distance",
    "load_catalog",
    "sufficiency_curve",
]
