"""
Unitary (birefringence) and Hermitian (diattenuation) filters in the QFT domain

Filters act bin-wise on quaternion spectra. Parameters are given on the
half-grid; the extension to negative frequencies follows the i-Hermitian
symmetry of real bivariate signals, and the self-mirrored bins (DC and the
even-N Nyquist bin) are projected back onto span{1, i} after filtering.

The 2×2 complex-matrix view of the same filters is implemented here as
well (``params_to_matrix``, ``polar_decompose``, ``matrix_apply``).
"""

from typing import Tuple, Union

import numpy as np
import structlog

from app.exceptions import GridMismatchError, InvalidInputError, NumericalFailureError
from app.models.densities import (
    PolarizationDensity,
    mirror_density_vectors,
    mirror_index,
    sanitize_density,
    self_mirrored_bins,
)
from app.models.filters import HermitianFilterParams, MatrixFilter, UnitaryFilterParams
from app.models.quaternion import (
    UNIT_I,
    UNIT_J,
    embed_cj,
    pure,
    qconj,
    qexp,
    qinner,
    qmul,
)
from app.models.signals import QSpectrum

logger = structlog.get_logger(__name__)

_J_AXIS = np.array([0.0, 1.0, 0.0])
_SVD_ZERO = 1e-300


# ---------------------------------------------------------------------------
# Grid helpers
# ---------------------------------------------------------------------------


def _check_half_grid(size: int, n_samples: int, what: str) -> None:
    expected = n_samples // 2 + 1
    if size != expected:
        raise GridMismatchError(
            f"grid mismatch: {what} has {size} bins, spectrum of length {n_samples} needs {expected}"
        )


def project_self_mirrored(bins: np.ndarray, n_samples: int) -> np.ndarray:
    out = np.array(bins, dtype=float, copy=True)
    out[self_mirrored_bins(n_samples), 2:] = 0.0
    return out


def extend_unitary(p: UnitaryFilterParams, n_samples: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full-grid (mu, alpha, phi): mu(−ν) = involution(mu, i), phi(−ν) = −phi"""
    src, negative = mirror_index(n_samples)
    mu = p.mu[src].copy()
    mu[negative, 1:] *= -1.0
    phi = np.where(negative, -p.phi[src], p.phi[src])
    return mu, p.alpha[src].copy(), phi


def extend_hermitian(p: HermitianFilterParams, n_samples: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full-grid (K, eta, mu) with the density mirror rule for the axis"""
    src, negative = mirror_index(n_samples)
    mu = p.axes_or_zero()[src]
    mu[negative] = mirror_density_vectors(mu[negative])
    return p.K[src].copy(), p.eta[src].copy(), mu


# ---------------------------------------------------------------------------
# Bin-wise kernels (no symmetry handling)
# ---------------------------------------------------------------------------


def apply_unitary_bins(bins: np.ndarray, mu: np.ndarray, alpha: np.ndarray, phi: np.ndarray) -> np.ndarray:
    left = qexp(mu, np.asarray(alpha) / 2.0)
    right = qexp(_J_AXIS, np.asarray(phi))
    return qmul(qmul(left, bins), right)


def apply_hermitian_bins(bins: np.ndarray, K: np.ndarray, eta: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """K [X - eta mu X j]; zero axis rows are allowed where eta = 0"""
    K = np.asarray(K, dtype=float)[..., None]
    eta = np.asarray(eta, dtype=float)[..., None]
    return K * (bins - eta * qmul(qmul(pure(mu), bins), UNIT_J))


def quaternion_coefficients(matrices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quaternions (P, Q) with M X = P X - Q j X j for M = [[a, b], [c, d]]

    P = ½(a - b i + i c - i d i), Q = ½(a + b i + i c + i d i)
    """
    M = np.asarray(matrices, dtype=complex)
    a, b = embed_cj(M[..., 0, 0]), embed_cj(M[..., 0, 1])
    c, d = embed_cj(M[..., 1, 0]), embed_cj(M[..., 1, 1])
    bi = qmul(b, UNIT_I)
    ic = qmul(UNIT_I, c)
    idi = qmul(qmul(UNIT_I, d), UNIT_I)
    return 0.5 * (a - bi + ic - idi), 0.5 * (a + bi + ic + idi)


def matrix_apply_bins(bins: np.ndarray, matrices: np.ndarray) -> np.ndarray:
    P, Q = quaternion_coefficients(matrices)
    return qmul(P, bins) - qmul(qmul(qmul(Q, UNIT_J), bins), UNIT_J)


# ---------------------------------------------------------------------------
# Spectrum-level filtering
# ---------------------------------------------------------------------------


def apply_unitary(X: QSpectrum, p: UnitaryFilterParams) -> QSpectrum:
    _check_half_grid(p.size, X.n, "unitary filter")
    mu, alpha, phi = extend_unitary(p, X.n)
    Y = apply_unitary_bins(X.bins, mu, alpha, phi)
    return QSpectrum(bins=project_self_mirrored(Y, X.n), dt=X.dt)


def apply_hermitian(X: QSpectrum, p: HermitianFilterParams) -> QSpectrum:
    _check_half_grid(p.size, X.n, "Hermitian filter")
    K, eta, mu = extend_hermitian(p, X.n)
    Y = apply_hermitian_bins(X.bins, K, eta, mu)
    return QSpectrum(bins=project_self_mirrored(Y, X.n), dt=X.dt)


def matrix_apply(X: QSpectrum, M: MatrixFilter) -> QSpectrum:
    """Apply half-grid matrices, extended by M(−ν) = conj(M(ν))"""
    _check_half_grid(M.size, X.n, "matrix filter")
    src, negative = mirror_index(X.n)
    full = M.matrices[src].copy()
    full[negative] = np.conj(full[negative])
    Y = matrix_apply_bins(X.bins, full)
    return QSpectrum(bins=project_self_mirrored(Y, X.n), dt=X.dt)


# ---------------------------------------------------------------------------
# Density maps and gain
# ---------------------------------------------------------------------------


def unitary_density_map(d: PolarizationDensity, p: UnitaryFilterParams) -> PolarizationDensity:
    """Rotation of the polarization axis by alpha about mu; S0 and Phi unchanged"""
    _check_half_grid(p.size, d.n_samples, "unitary filter")
    q = qexp(p.mu, p.alpha / 2.0)
    G = qmul(qmul(q, d.to_quaternions()), qconj(q))
    G = sanitize_density(G, scale=d.S0)
    return PolarizationDensity.from_quaternions(G, n_samples=d.n_samples, dt=d.dt)


def hermitian_density_map(d: PolarizationDensity, p: HermitianFilterParams) -> PolarizationDensity:
    """
    Output density of a Hermitian filter.

    scalar: S0 K² [1 + eta² + 2 eta Phi ⟨mu, mu_x⟩]
    vector: S0 K² [2 eta mu + Phi (mu_x - eta² mu mu_x mu)]
    """
    _check_half_grid(p.size, d.n_samples, "Hermitian filter")
    S0 = d.S0
    V = d.vector()
    mu = p.axes_or_zero()
    K2 = p.K**2
    eta = p.eta

    aligned = np.sum(mu * V, axis=-1)
    mvm = qmul(qmul(pure(mu), pure(V)), pure(mu))[:, 1:]
    scalar = K2 * ((1.0 + eta**2) * S0 + 2.0 * eta * aligned)
    vector = K2[:, None] * (2.0 * (eta * S0)[:, None] * mu + V - (eta**2)[:, None] * mvm)

    scale = K2 * S0 * (1.0 + eta) ** 2
    if np.any(scalar < -1e-9 * np.maximum(scale, np.finfo(float).tiny)):
        raise NumericalFailureError("Hermitian density map produced a negative scalar part")
    G = sanitize_density(np.concatenate([scalar[:, None], vector], axis=-1), scale=scale)
    return PolarizationDensity.from_quaternions(G, n_samples=d.n_samples, dt=d.dt)


def gain(d_in: PolarizationDensity, p: HermitianFilterParams) -> np.ndarray:
    """
    Power gain S0_y / S0_x per bin.

    Bins with S0_x = 0 are undefined and returned as NaN.
    """
    _check_half_grid(p.size, d_in.n_samples, "Hermitian filter")
    alignment = np.where(d_in.has_axis & p.has_axis, qinner(d_in.axes_or_zero(), p.axes_or_zero()), 0.0)
    G = p.K**2 * (1.0 + p.eta**2 + 2.0 * p.eta * d_in.Phi * alignment)
    undefined = d_in.S0 <= 0
    if np.any(undefined):
        logger.warning("gain_undefined_bins", count=int(np.sum(undefined)))
    return np.where(undefined, np.nan, G)


# ---------------------------------------------------------------------------
# Identification
# ---------------------------------------------------------------------------


def _eta_from_ratio(r: np.ndarray) -> np.ndarray:
    """Root in [0, 1] of 2 eta / (1 + eta²) = r, in the cancellation-free form"""
    r = np.clip(r, 0.0, 1.0)
    return r / (1.0 + np.sqrt(1.0 - r**2))


def identify_from_gain_extrema(Gmax, Gmin):
    """
    Recover (K, eta) from the extreme power gains K²(1±eta)²

    Args:
        Gmax: largest gain (aligned fully polarized input)
        Gmin: smallest gain (anti-aligned input)

    Returns:
        (K, eta), floats for scalar input and arrays otherwise
    """
    scalar_input = np.isscalar(Gmax) and np.isscalar(Gmin)
    Gmax = np.asarray(Gmax, dtype=float)
    Gmin = np.asarray(Gmin, dtype=float)
    if np.any(Gmin > Gmax):
        raise InvalidInputError("Gmin > Gmax")
    if np.any(Gmin < 0) or np.any(Gmax <= 0):
        raise InvalidInputError("Gains must satisfy Gmax > 0 and Gmin >= 0")
    eta = _eta_from_ratio((Gmax - Gmin) / (Gmax + Gmin))
    # equals (Gmax - Gmin) / (4 eta) for eta > 0 and Gmax for eta = 0
    K = np.sqrt((Gmax + Gmin) / (2.0 * (1.0 + eta**2)))
    if scalar_input:
        return float(K), float(eta)
    return K, eta


def identify_from_unpolarized_noise(Gyy: PolarizationDensity, sigma0sq: float) -> HermitianFilterParams:
    """Filter parameters from the output density of unpolarized white noise of density sigma0sq"""
    if sigma0sq <= 0:
        raise InvalidInputError("sigma0sq must be > 0")
    if np.any(Gyy.Phi > 1.0):
        raise InvalidInputError("Phi_y > 1")
    eta = np.where(Gyy.has_axis, _eta_from_ratio(Gyy.Phi), 0.0)
    K = np.sqrt(Gyy.S0 / (sigma0sq * (1.0 + eta**2)))
    return HermitianFilterParams(K=K, eta=eta, mu=Gyy.mu)


# ---------------------------------------------------------------------------
# Matrix bridge
# ---------------------------------------------------------------------------


def params_to_matrix(p: Union[UnitaryFilterParams, HermitianFilterParams]) -> MatrixFilter:
    if isinstance(p, UnitaryFilterParams):
        u = qexp(p.mu, p.alpha / 2.0)
        a = u[:, 0] + 1j * u[:, 2]
        r = u[:, 1] + 1j * u[:, 3]
        M = np.stack([np.stack([a, -np.conj(r)], -1), np.stack([r, np.conj(a)], -1)], -2)
        return MatrixFilter(matrices=M * np.exp(1j * p.phi)[:, None, None])
    if isinstance(p, HermitianFilterParams):
        m = p.eta[:, None] * p.axes_or_zero()
        M = np.stack(
            [
                np.stack([1.0 + m[:, 1], m[:, 2] + 1j * m[:, 0]], -1),
                np.stack([m[:, 2] - 1j * m[:, 0], 1.0 - m[:, 1]], -1),
            ],
            -2,
        )
        return MatrixFilter(matrices=M * p.K[:, None, None])
    raise InvalidInputError(f"Unsupported filter parameters: {type(p).__name__}")


def polar_decompose(M: MatrixFilter) -> Tuple[UnitaryFilterParams, HermitianFilterParams]:
    """
    M = U H with H = (M^H M)^{1/2}, computed through the SVD M = W S V^H

    Eigenvalues of H are ordered lambda1 >= lambda2 so that eta >= 0. A zero
    matrix gives K = 0 and the identity as unitary part.
    """
    A = M.matrices
    W, s, Vh = np.linalg.svd(A)
    U = W @ Vh
    V = np.conj(np.swapaxes(Vh, -1, -2))
    H = V @ (s[..., :, None] * Vh)

    degenerate = s[:, 0] <= _SVD_ZERO
    if np.any(degenerate):
        U[degenerate] = np.eye(2)
        logger.debug("polar_decompose_zero_bins", count=int(np.sum(degenerate)))

    # Hermitian part
    lam1, lam2 = s[:, 0], s[:, 1]
    K = 0.5 * (lam1 + lam2)
    safe_K = np.where(K > 0, K, 1.0)
    eta = np.where(K > 0, (lam1 - lam2) / np.where(K > 0, 2.0 * K, 1.0), 0.0)
    eta_mu = np.stack(
        [H[:, 0, 1].imag / safe_K, (H[:, 0, 0] - H[:, 1, 1]).real / (2.0 * safe_K), H[:, 0, 1].real / safe_K],
        axis=-1,
    )
    axis_norm = np.linalg.norm(eta_mu, axis=-1)
    polarizing = (K > 0) & (axis_norm > 1e-12)
    mu_h = np.full_like(eta_mu, np.nan)
    mu_h[polarizing] = eta_mu[polarizing] / axis_norm[polarizing, None]
    eta = np.where(polarizing, eta, 0.0)

    # Unitary part: U = exp(j phi) [[p, -conj(r)], [r, conj(p)]]
    phi = 0.5 * np.angle(np.linalg.det(U))
    Ut = U * np.exp(-1j * phi)[:, None, None]
    u = np.stack([Ut[:, 0, 0].real, Ut[:, 1, 0].real, Ut[:, 0, 0].imag, Ut[:, 1, 0].imag], axis=-1)
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    vec_norm = np.linalg.norm(u[:, 1:], axis=-1)
    alpha = 2.0 * np.arctan2(vec_norm, u[:, 0])
    rotating = vec_norm > 1e-12
    mu_u = np.tile(_J_AXIS, (A.shape[0], 1))
    mu_u[rotating] = u[rotating, 1:] / vec_norm[rotating, None]

    return (
        UnitaryFilterParams(mu=mu_u, alpha=alpha, phi=phi),
        HermitianFilterParams(K=K, eta=eta, mu=mu_h),
    )
