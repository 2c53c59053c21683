"""pcflab: a desk-scale numerical laboratory for pluriclosed flow,
generalized Ricci flow, and their reductions on complex surfaces."""

__version__ = "0.1.0"
