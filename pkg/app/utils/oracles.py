"""
Independent evaluation paths used to cross-check the quaternion-domain code

Everything here works on the ComplexPair (X1, X2) representation with plain
complex 2×2 linear algebra, or by direct summation, so that it shares no
kernel with the quaternion implementations it validates.
"""

import numpy as np

from app.models.densities import PolarizationDensity
from app.models.quaternion import from_complex_pair, qexp, qmul, to_complex_pair
from app.models.signals import BivariateSignal, QSpectrum


def complex_pair_apply(bins: np.ndarray, matrices: np.ndarray) -> np.ndarray:
    """Y1 = a X1 + b X2, Y2 = c X1 + d X2 bin by bin on (n, 4) quaternion arrays"""
    X1, X2 = to_complex_pair(bins)
    M = np.asarray(matrices, dtype=complex)
    Y1 = M[..., 0, 0] * X1 + M[..., 0, 1] * X2
    Y2 = M[..., 1, 0] * X1 + M[..., 1, 1] * X2
    return from_complex_pair(Y1, Y2)


def density_matrix(G: np.ndarray) -> np.ndarray:
    """
    2×2 spectral matrix of quaternion densities G = S0 + i S3 + j S1 + k S2

    Returns:
        np.ndarray: (n, 2, 2) Hermitian matrices ½[[S0+S1, S2+jS3], [S2-jS3, S0-S1]]
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    S0, S3, S1, S2 = G[:, 0], G[:, 1], G[:, 2], G[:, 3]
    P = np.empty((G.shape[0], 2, 2), dtype=complex)
    P[:, 0, 0] = S0 + S1
    P[:, 0, 1] = S2 + 1j * S3
    P[:, 1, 0] = S2 - 1j * S3
    P[:, 1, 1] = S0 - S1
    return 0.5 * P


def wiener_matrix_oracle(
    Y: QSpectrum, Gxx: PolarizationDensity, Gyy: PolarizationDensity, tikhonov: float = 1e-12
) -> QSpectrum:
    """
    X̂ = P_xx (P_yy + eps·tr(P_yy)·I)⁻¹ Y evaluated with numpy.linalg.solve

    Bins where P_yy vanishes map to zero.
    """
    Pxx = density_matrix(Gxx.full_grid_quaternions())
    Pyy = density_matrix(Gyy.full_grid_quaternions())
    trace = np.real(np.trace(Pyy, axis1=-2, axis2=-1))
    active = trace > 0
    regularized = Pyy + (tikhonov * np.where(active, trace, 1.0))[:, None, None] * np.eye(2)
    regularized[~active] = np.eye(2)

    X1, X2 = to_complex_pair(Y.bins)
    rhs = np.stack([X1, X2], axis=-1)[..., None]
    solved = np.linalg.solve(regularized, rhs)
    est = (Pxx @ solved)[..., 0]
    est[~active] = 0.0
    return QSpectrum(bins=from_complex_pair(est[:, 0], est[:, 1]), dt=Y.dt)


def direct_qft(x: BivariateSignal) -> QSpectrum:
    """O(N²) summation of x[n]·exp(-j 2π k n / N); meant for small N"""
    n = x.n
    values = np.zeros((n, 4))
    values[:, 0] = x.x1
    values[:, 1] = x.x2
    k = np.arange(n)
    kernel = qexp(np.array([0.0, 1.0, 0.0]), -2.0 * np.pi * np.outer(k, k) / n)
    bins = np.sum(qmul(values[None, :, :], kernel), axis=1)
    return QSpectrum(bins=bins, dt=x.dt)
