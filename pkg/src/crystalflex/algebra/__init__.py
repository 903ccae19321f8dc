"""Exact Laurent-polynomial algebra and small dense linear algebra."""
from .elimination import (
    UnsupportedOperation,
    determinant,
    gcd_exact,
    gcd_many,
    resultant,
    univariate_roots,
)
from .gaussian import GaussianRational, as_gaussian
from .laurent import LaurentPolynomial, NotDivisibleError, monomial_normalize, poly_eval
from .linalg import (
    DEFAULT_RANK_TOL,
    ROUNDOFF_FLOOR,
    PolynomialMatrix,
    exact_rank,
    numeric_rank,
    rank_threshold,
    symbolic_minors,
)

__all__ = [
    "DEFAULT_RANK_TOL",
    "GaussianRational",
    "LaurentPolynomial",
    "NotDivisibleError",
    "PolynomialMatrix",
    "ROUNDOFF_FLOOR",
    "UnsupportedOperation",
    "as_gaussian",
    "determinant",
    "exact_rank",
    "gcd_exact",
    "gcd_many",
    "monomial_normalize",
    "numeric_rank",
    "poly_eval",
    "rank_threshold",
    "resultant",
    "symbolic_minors",
    "univariate_roots",
]
