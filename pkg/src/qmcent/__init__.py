"""Walker/guide-wave ensemble simulations of 1D two-electron systems.

The package pairs a numerically exact two-body grid solver with a
guide-wave quantum Monte Carlo engine and computes spatially resolved
entanglement diagnostics (Gram-matrix spectra, entropies, functional
standard deviation) from the resulting wave ensembles.
"""

__version__ = "0.1.0"
