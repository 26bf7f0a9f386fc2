"""
Intrinsic dimension estimation
"""

from .levina_bickel import DimensionEstimate, levina_bickel, nearest_neighbors, round_estimate

__all__ = ["DimensionEstimate", "levina_bickel", "nearest_neighbors", "round_estimate"]
