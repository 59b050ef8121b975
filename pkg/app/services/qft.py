"""
Quaternion Fourier transform (right-sided kernel on axis j)

The transform of x = x1 + i·x2 is X = X1 + i·X2 where X1, X2 are the
ordinary DFTs of the real channels with their imaginary unit read as j.
Forward is unnormalized, the inverse carries 1/N.
"""

from typing import Tuple

import numpy as np
import structlog

from app.models.quaternion import from_complex_pair, polar_product, qinvolution, qnorm, to_complex_pair
from app.models.signals import BivariateSignal, InverseTransformResult, QSpectrum

logger = structlog.get_logger(__name__)

NON_BIVARIATE_TOL = 1e-8
SYMMETRY_TOL = 1e-10


def transform_samples(samples: np.ndarray) -> np.ndarray:
    """QFT of (..., N, 2) real samples along the N axis, returning (..., N, 4) bins"""
    spectra = np.fft.fft(np.asarray(samples, dtype=float), axis=-2)
    return from_complex_pair(spectra[..., 0], spectra[..., 1])


def qft_forward(x: BivariateSignal) -> QSpectrum:
    return QSpectrum(bins=transform_samples(x.samples), dt=x.dt)


def qft_inverse(X: QSpectrum) -> InverseTransformResult:
    """
    Inverse QFT.

    A spectrum without i-Hermitian symmetry maps to a signal with j/k
    components; those are dropped from the returned signal and their energy
    share is reported (``non_bivariate`` above 1e-8).
    """
    X1, X2 = to_complex_pair(X.bins)
    x1 = np.fft.ifft(X1)
    x2 = np.fft.ifft(X2)

    kept = float(np.sum(x1.real**2 + x2.real**2))
    residual = float(np.sum(x1.imag**2 + x2.imag**2))
    total = kept + residual
    fraction = residual / total if total > 0 else 0.0
    non_bivariate = fraction > NON_BIVARIATE_TOL
    if non_bivariate:
        logger.warning("non_bivariate_output", residual_fraction=fraction, n=X.n)

    signal = BivariateSignal(samples=np.stack([x1.real, x2.real], axis=-1), dt=X.dt)
    return InverseTransformResult(signal=signal, residual_fraction=fraction, non_bivariate=non_bivariate)


def symmetry_violation(X: QSpectrum) -> float:
    """max_k |X[N-k] - involution(X[k], i)| relative to the largest bin modulus"""
    mirrored = X.bins[(-np.arange(X.n)) % X.n]
    defect = qnorm(mirrored - qinvolution(X.bins, "i"))
    scale = float(np.max(qnorm(X.bins)))
    return float(np.max(defect) / scale) if scale > 0 else 0.0


def is_i_hermitian(X: QSpectrum, tol: float = SYMMETRY_TOL) -> bool:
    return symmetry_violation(X) <= tol


def parseval_invariants(x: BivariateSignal) -> Tuple[float, np.ndarray]:
    """
    Time-domain energy and polar invariant.

    Returns:
        Tuple[float, np.ndarray]: (Σ|x|²·dt, Σ x j conj(x)·dt as an (i, j, k) 3-vector)
    """
    x1, x2 = x.x1, x.x2
    energy = float(np.sum(x1**2 + x2**2) * x.dt)
    # x j conj(x) = (x1² - x2²) j + 2 x1 x2 k for x in C_i
    polar3 = np.array([0.0, np.sum(x1**2 - x2**2), np.sum(2.0 * x1 * x2)]) * x.dt
    return energy, polar3


def spectral_invariants(X: QSpectrum) -> Tuple[float, np.ndarray]:
    """Frequency-domain counterparts Σ|X|²·dt/N and Σ X j conj(X)·dt/N"""
    scale = X.dt / X.n
    energy = float(np.sum(X.bins**2) * scale)
    polar3 = np.sum(polar_product(X.bins), axis=0)[1:] * scale
    return energy, polar3
