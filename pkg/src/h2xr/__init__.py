"""Minimal and umbilical graphs in H^2 x R: pointwise geometry, an explicit
solution catalog, a finite-difference Dirichlet solver and area tools."""

from .ambient import (
    ChristoffelTable,
    DomainPoint,
    FrameVector,
    christoffels,
    covariant_derivative,
    geodesic_curvature_graph_curve,
    inner,
    metric_tensor,
)
from .catalog import Family, SolutionSpec, list_expected_properties, make, special_umbilical
from .errors import (
    ConfigError,
    DomainViolation,
    GeometryError,
    LevelCurveDegenerate,
    NonConvergence,
    SingularJacobian,
)
from .pde import GridField, SolveReport, assemble_jacobian, assemble_residual, solve_dirichlet
from .shape import (
    Jet2,
    Jet3,
    ShapeOperator,
    SurfaceData,
    codazzi_identity_residual,
    codazzi_system_residual,
    gauss_map,
    gauss_pca_rank,
    gauss_rank,
    mean_curvature,
    minimal_residual,
    shape_operator,
    surface_data,
    totally_geodesic_residual,
    umbilicity_residual,
)
from .variational import AreaReport, ComparisonTable, area, area_comparison, induced_laplacian

__version__ = "0.1.0"
