"""Newton polyhedra, toric charts, resolution trees and growth-exponent experiments
for polynomials near the origin."""

from .poly import Polynomial, TruncatedSeries, parse_polynomial, format_polynomial
from .geometry import newton_polyhedron, newton_distance, central_face, face_zero_order, predict_growth
from .fan import chart_atlas, cone_to_chart, check_atlas_distance, check_factorization, unit_certificate
from .resolution import ResolutionConfig, resolve, verify_chart
from .harness import count_divisibility, count_series, exp_sum, sublevel_volume, fit_growth, cross_check_identity

__version__ = "0.1.0"
