"""Exact-arithmetic workbench for the Painleve I partition function.

Three independent routes to the same large-time expansion (topological
recursion, holomorphic anomaly equation, rank-5/2 Whittaker vectors) plus
the dictionaries that let them be compared coefficient by coefficient.
"""

__version__ = "0.1.0"
SCHEMA_VERSION = "1"
