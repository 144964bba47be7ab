"""torustomo: integral-geometric and barcode experiments on T^n x R^n.

Crofton integrals of sine-graph Lagrangian tomographs, density scaling laws,
homogenization limits, and sublevel persistence barcodes of generating
functions, wired together into a config-driven experiment runner.
"""

from ._kernels import backend_name
from .density import (
    Density,
    Frame,
    InvariantDensity,
    LinearReparam,
    MetricDensity,
    check_homogeneity,
    integrate_density_over_graph,
    invariant_density_eval,
    metric_density_eval,
    pullback_Pk,
    scaling_lemma_check,
)
from .fields import (
    GraphLagrangian,
    OneForm,
    PeriodicScalarField,
    QuadratureRule,
    eval_one_form,
    graph_volume,
    oscillation,
    sup_norm,
    torus_point,
)
from .persistence import (
    Barcode,
    DegenerateFieldError,
    FilteredTorusComplex,
    bar_count,
    barcode,
    count_critical_points,
    stability_count_check,
    verify_bar_identity,
)
from .roots import TANGENT
from .tomograph import (
    CroftonResult,
    ExcessTangencyError,
    RadialMeasure,
    SParam,
    Tomograph,
    crofton_integral,
    flat_crofton_closed,
    homogenize,
    homogenized_limit,
    intersection_count,
    lagrangian_at,
    normalization_constant,
    potential_field,
    sigma,
)

__version__ = "0.1.0"

__all__ = [
    "Barcode",
    "CroftonResult",
    "DegenerateFieldError",
    "Density",
    "ExcessTangencyError",
    "FilteredTorusComplex",
    "Frame",
    "GraphLagrangian",
    "InvariantDensity",
    "LinearReparam",
    "MetricDensity",
    "OneForm",
    "PeriodicScalarField",
    "QuadratureRule",
    "RadialMeasure",
    "SParam",
    "TANGENT",
    "Tomograph",
    "backend_name",
    "bar_count",
    "barcode",
    "check_homogeneity",
    "count_critical_points",
    "crofton_integral",
    "eval_one_form",
    "flat_crofton_closed",
    "graph_volume",
    "homogenize",
    "homogenized_limit",
    "integrate_density_over_graph",
    "intersection_count",
    "invariant_density_eval",
    "lagrangian_at",
    "metric_density_eval",
    "normalization_constant",
    "oscillation",
    "potential_field",
    "pullback_Pk",
    "scaling_lemma_check",
    "sigma",
    "stability_count_check",
    "sup_norm",
    "torus_point",
    "verify_bar_identity",
]
