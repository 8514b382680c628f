"""Central univariate and multivariate t probabilities."""

from .base import CorrelationMatrix, ProbEstimate, Rectangle
from .engine import (
    mc_orthant_prob,
    mvt_exch_tail_prob,
    mvt_rect_prob,
    rect_prob_by_orthants,
    rectangle_prob,
    sample_mvt,
    upper_orthant_prob,
)
from .univariate import t_quantile, t_tail

__all__ = [
    "CorrelationMatrix",
    "ProbEstimate",
    "Rectangle",
    "mc_orthant_prob",
    "mvt_exch_tail_prob",
    "mvt_rect_prob",
    "rect_prob_by_orthants",
    "rectangle_prob",
    "sample_mvt",
    "t_quantile",
    "t_tail",
    "upper_orthant_prob",
]
