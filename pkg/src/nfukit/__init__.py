"""Desk-scale logic and model-construction toolkit.

Subpackages cover five predicate-language formulas with stratification
checking, set coding by pointed digraphs, membership models derived from a
structure with an endomorphism, chains of embedded models with direct
limits, tree-assignment partition combinatorics, and a supported-function
term model over integer-indexed coordinates.
"""

__version__ = "0.1.0"
