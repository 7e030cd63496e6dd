"""Synthetic 2-D playground: datasets, small classifier families, scenarios.

The zoo exists to manufacture run collections whose banding and fairness
behaviour is known by construction, both for tests and for end-to-end CLI
demos.  Classifiers here follow the usual fit/predict shape and know nothing
about the audit types; enumeration wraps their outputs into ModelRuns.
"""

from .classifiers import (
    AxisAlignedTreeClassifier,
    HalfplaneClassifier,
    NearestNeighborsClassifier,
    PolynomialBoundaryClassifier,
    line_params,
)
from .datasets import Box, Dataset2D, DatasetSpec, PointSet, generate_dataset, grid_point_set
from .families import FamilySpec, FlipOutcome, ZooModel, enumerate_family, flip_search
from .regions import RegionEstimate, estimate_disputable_region, mask_to_pgm
from .scenarios import SCENARIOS, Scenario, build_scenario

__all__ = [
    "AxisAlignedTreeClassifier",
    "Box",
    "Dataset2D",
    "DatasetSpec",
    "FamilySpec",
    "FlipOutcome",
    "HalfplaneClassifier",
    "NearestNeighborsClassifier",
    "PointSet",
    "PolynomialBoundaryClassifier",
    "RegionEstimate",
    "SCENARIOS",
    "Scenario",
    "ZooModel",
    "build_scenario",
    "enumerate_family",
    "estimate_disputable_region",
    "flip_search",
    "generate_dataset",
    "grid_point_set",
    "line_params",
    "mask_to_pgm",
]
