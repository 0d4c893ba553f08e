"""
Toeplitz Spectra

Spectra, complex band structures, pseudospectra and defect-mode decay for
banded and dense non-Hermitian Toeplitz operators.
"""

__version__ = "0.1.0"
