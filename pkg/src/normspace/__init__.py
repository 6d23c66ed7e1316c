"""Norms over local fields, boundary points of their compactifications, and
Siegel-set reduction for PGL_d."""
from .scalars import Place, RatFunc, normalized_abs, valuation
from .norms import Norm, SemiNorm

__all__ = ["Place", "RatFunc", "normalized_abs", "valuation", "Norm", "SemiNorm"]
__version__ = "0.1.0"
