"""
BivQFT
Quaternion Fourier transform toolkit for filtering, synthesis, denoising and
decomposition of bivariate signals
"""

__version__ = "1.0.0"
__author__ = "BivQFT Team"
__description__ = "Polarization-aware LTI filtering of bivariate signals in the quaternion domain"
