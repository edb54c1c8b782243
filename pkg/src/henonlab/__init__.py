"""henonlab: period-doubling renormalization of dissipative Henon-like maps.

A numerical laboratory for strongly dissipative Henon-like maps at the
accumulation of period doubling: renormalization towers, invariant
manifolds, topological boxings, the kappa and Palis invariants,
heteroclinic-tangency detection, and multi-parameter blended families.
"""

__version__ = "0.1.0"

from henonlab._kernel import HAVE_COMPILED

__all__ = ["HAVE_COMPILED", "__version__"]
