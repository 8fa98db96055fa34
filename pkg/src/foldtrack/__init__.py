"""foldtrack: outer automorphisms of free groups as marked-graph maps.

Fold factorizations with explicit controlled inverses, transition-matrix
expansion spectra, reducibility search, and the log-total-length quasi-metric
on marked graphs.
"""

__version__ = "0.1.0"
