"""Exact certification of the worst-case fixed-point residual of the proximal point method."""

from .dual_certificate import certified_upper_bound, verify_certificate, zeta
from .worst_case import certify_optimal_rate

__all__ = ["certified_upper_bound", "certify_optimal_rate", "verify_certificate", "zeta"]
__version__ = "0.1.0"
