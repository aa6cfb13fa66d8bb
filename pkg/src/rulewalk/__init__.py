"""rulewalk: temporal rule mining on interval-labeled hypergraphs."""

__version__ = "0.1.0"

from .hypergraph import Event, GraphError, Interval, TemporalHypergraph
from .rules import Atom, Query, TemporalRule

__all__ = [
    "Atom",
    "Event",
    "GraphError",
    "Interval",
    "Query",
    "TemporalHypergraph",
    "TemporalRule",
    "__version__",
]
