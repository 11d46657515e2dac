"""Numerical toolkit for umbilic points of surfaces in deformed 3-metrics.

Metric fields and Christoffel symbols (:mod:`.tensor`), the shape-operator
pipeline (:mod:`.shape`), winding-number indices and foliations
(:mod:`.umbilic`), the two deformation families (:mod:`.constructions`) and
residual/budget verification (:mod:`.verify`).
"""

from .constructions import (
    FlatFamilyParams,
    InvalidParameters,
    SphereAtlas,
    SphereFamilyParams,
    build_flat_metric,
    build_sphere_metric,
    lambda_budget_flat,
    lambda_budget_sphere,
)
from .shape import SurfaceChart, second_fundamental_components, surface_geometry
from .tensor import MetricField, christoffel, metric_det, metric_inverse, pointwise_deviation
from .umbilic import (
    UmbilicReport,
    principal_directions,
    sphere_scan,
    trace_foliation,
    umbilic_index,
    umbilic_scan,
    winding_number,
)
from .verify import (
    BudgetReport,
    ResidualReport,
    convexity_scan,
    run_residual_suite,
    verify_theorem1,
    verify_theorem2,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetReport", "FlatFamilyParams", "InvalidParameters", "MetricField", "ResidualReport",
    "SphereAtlas", "SphereFamilyParams", "SurfaceChart", "UmbilicReport", "build_flat_metric",
    "build_sphere_metric", "christoffel", "convexity_scan", "lambda_budget_flat",
    "lambda_budget_sphere", "metric_det", "metric_inverse", "pointwise_deviation",
    "principal_directions", "run_residual_suite", "second_fundamental_components", "sphere_scan",
    "surface_geometry", "trace_foliation", "umbilic_index", "umbilic_scan", "verify_theorem1",
    "verify_theorem2", "winding_number",
]
