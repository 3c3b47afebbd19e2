"""K-P sub-Riemannian geodesics on SU(n) and the SU(2)/K quotient disc."""
from __future__ import annotations

__version__ = "0.1.0"

from .numerics import DimensionError, DomainExit, integrate_ode, make_rng, mat_exp  # noqa: E402
from .lie import (  # noqa: E402
    InvariantError,
    KPDecomposition,
    aiii_regular_witness,
    isotropy_algebra_dim,
    is_regular,
    killing_inner,
    make_aiii,
)
from .geodesics import GeodesicSpec, curve_length, geodesic_point, sample_geodesic  # noqa: E402
from .quotient import (  # noqa: E402
    SingularPointError,
    christoffel,
    lift_curve,
    lift_tangent,
    metric_components,
    project,
    quotient_distance,
    quotient_geodesic,
    sectional_curvature,
)
from .cutlocus import (  # noqa: E402
    SweepGrid,
    convexity_check,
    cut_locus_report,
    first_singular_hit,
    regular_non_intersection_check,
    sweep_distance,
)
