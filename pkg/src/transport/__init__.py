"""
Entropic optimal transport
"""

from .sinkhorn import SinkhornResult, TransportResult, entropic_transport, sinkhorn_divergence, uniform_reference

__all__ = [
    "SinkhornResult",
    "TransportResult",
    "entropic_transport",
    "sinkhorn_divergence",
    "uniform_reference",
]
