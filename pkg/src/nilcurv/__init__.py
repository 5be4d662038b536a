"""Curvature operators of polynomial neutral-signature metrics and sampling certificates for their Jordan data."""
from .metrics import (
    AffineMetric,
    FlatMetric,
    GradientMetric,
    MetricError,
    ProductMetric,
    PsiMetric,
    build_metric,
    load_metric,
    metric_at,
)
from .polyfunc import PolyError, PolyMap
from .spectral import jordan_equivalent, jordan_profile, nilpotency_index, numerical_rank, spectrum
from .tensor_engine import CurvatureData, christoffel, curvature, nabla_curvature, ricci
from .verifier import Tolerances, VerificationReport

__all__ = [
    "AffineMetric", "FlatMetric", "GradientMetric", "MetricError", "ProductMetric", "PsiMetric",
    "build_metric", "load_metric", "metric_at", "PolyError", "PolyMap", "jordan_equivalent",
    "jordan_profile", "nilpotency_index", "numerical_rank", "spectrum", "CurvatureData", "christoffel",
    "curvature", "nabla_curvature", "ricci", "Tolerances", "VerificationReport",
]
