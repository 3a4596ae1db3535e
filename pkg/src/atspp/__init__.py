"""Asymmetric TSP path LP-rounding toolkit.

Pipeline: subtour-elimination LP by row generation, narrow s-t cut chain,
rerouted vector and its convex spanning-tree decomposition, negatively
correlated tree sampling by swap rounding, min-cost circulation patching,
and shortcutting to a Hamiltonian s-t path.  Exact oracles and a
worst-case instance family (integrality gap approaching 2) back the
verification suite.
"""

from .instance import (ArcVector, Cut, DirectedMetric, gap_instance,
                       metric_completion, parse_instance, random_instance)

__version__ = "0.1.0"

__all__ = [
    "ArcVector",
    "Cut",
    "DirectedMetric",
    "gap_instance",
    "metric_completion",
    "parse_instance",
    "random_instance",
    "__version__",
]
