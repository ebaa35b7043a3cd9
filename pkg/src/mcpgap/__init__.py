"""Sharp Poincare constants of one-dimensional MCP(K, N) densities."""

from .bounds import (
    BoundsPair,
    closed_form_bounds,
    intro_lower_bound,
    muckenhoupt_A,
    muckenhoupt_bounds,
    sphere_eigenvalue,
    sturm_constant,
    von_renesse_constant,
)
from .geometry import (
    CurvatureParams,
    DomainError,
    GridDensity,
    model_density,
    random_mcp_density,
    sample_model_density,
    validate_mcp_density,
)
from .sharp import ModelPoincare, SharpConstantResult, model_poincare, scan_profile, sharp_poincare
from .spectral import (
    BoundaryConditions,
    SolverError,
    SpectralResult,
    osc,
    rayleigh_quotient,
    spectral_gap,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryConditions",
    "BoundsPair",
    "CurvatureParams",
    "DomainError",
    "GridDensity",
    "ModelPoincare",
    "SharpConstantResult",
    "SolverError",
    "SpectralResult",
    "closed_form_bounds",
    "intro_lower_bound",
    "model_density",
    "model_poincare",
    "muckenhoupt_A",
    "muckenhoupt_bounds",
    "osc",
    "random_mcp_density",
    "rayleigh_quotient",
    "sample_model_density",
    "scan_profile",
    "sharp_poincare",
    "spectral_gap",
    "sphere_eigenvalue",
    "sturm_constant",
    "validate_mcp_density",
    "von_renesse_constant",
]
