"""Critical exponents, separable supersolutions and nonexistence certificates for
``-Delta u = c |x|^{-s} u^p`` in cones."""

__version__ = "0.1.0"

from .errors import (CoercivityError, ConeCritError, DomainError, IterationLimitError,  # noqa: E402
                     NumericalFailure, RegimeError, SearchFailure, UnsupportedShapeError)
from .spectral import (Arc, Cap, DomainSpec, ExplicitLambda, Orthant, lambda1,  # noqa: E402
                       principal_eigenfunction)
from .exponents import (alpha_roots, classify, kelvin_sigma, p_star_sub,  # noqa: E402
                        p_star_sub_kelvin, p_star_super, report)
from .angular_solver import build_supersolution, residual_polar, solve_psi  # noqa: E402
from .shooting import (ShootingParams, emden_fowler_transform, find_K,  # noqa: E402
                       nonexistence_certificate, shoot)

__all__ = [
    "Arc", "Cap", "CoercivityError", "ConeCritError", "DomainError", "DomainSpec",
    "ExplicitLambda", "IterationLimitError", "NumericalFailure", "Orthant", "RegimeError",
    "SearchFailure", "ShootingParams", "UnsupportedShapeError", "alpha_roots",
    "build_supersolution", "classify", "emden_fowler_transform", "find_K", "kelvin_sigma",
    "lambda1", "nonexistence_certificate", "p_star_sub", "p_star_sub_kelvin", "p_star_super",
    "principal_eigenfunction", "report", "residual_polar", "shoot", "solve_psi",
]
