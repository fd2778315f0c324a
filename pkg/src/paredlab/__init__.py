"""Combinatorics and numerics of pared deformation spaces of critically fixed
anti-rational maps: plane graphs and enrichments, invariant laminations,
anti-Blaschke products, degenerating families and their quasi-fixed trees,
and periodic-point monodromy."""

__version__ = "0.1.0"
