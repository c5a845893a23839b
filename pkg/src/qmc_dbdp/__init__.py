"""
QMC-DBDP
========

Deep backward dynamic programming for high-dimensional nonlinear parabolic
PDEs, trained on Monte Carlo or randomized quasi-Monte Carlo batches.
"""

__version__ = "0.1.0"
