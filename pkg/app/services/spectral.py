"""
Quaternion spectral densities: periodogram construction, (S0, Phi, mu)
decomposition, Stokes and Poincaré conversions, the unpolarized/polarized
split and the multi-realization estimator.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from app.exceptions import GridMismatchError, InvalidInputError
from app.models.densities import (
    EPS_POL,
    PoincareCoordinates,
    PolarizationDensity,
    StokesParams,
    half_grid_size,
    split_density,
)
from app.models.quaternion import PureUnitQuaternion, Quaternion, polar_product
from app.models.signals import BivariateSignal, QSpectrum
from app.services.qft import transform_samples

logger = structlog.get_logger(__name__)


def density_bins(bins: np.ndarray, dt: float) -> np.ndarray:
    """(|X|² + X j conj(X))·dt/N for (..., N, 4) spectra"""
    bins = np.asarray(bins, dtype=float)
    n = bins.shape[-2]
    G = polar_product(bins)
    G[..., 0] = np.sum(bins**2, axis=-1)
    return G * (dt / n)


def density_from_spectrum(X: QSpectrum, dt: Optional[float] = None) -> np.ndarray:
    """Per-bin periodogram density over the full N-point grid"""
    return density_bins(X.bins, X.dt if dt is None else dt)


def decompose_density(G: Union[Quaternion, np.ndarray]):
    """
    Read (S0, Phi, mu) off a quaternion density.

    A single ``Quaternion`` gives ``(float, float, PureUnitQuaternion | None)``;
    an (n, 4) array gives arrays with NaN axis rows where the axis is absent.
    """
    if isinstance(G, Quaternion):
        S0, Phi, mu = split_density(G.to_array()[None, :])
        axis = None if np.isnan(mu[0, 0]) else PureUnitQuaternion.from_vector(mu[0])
        return float(S0[0]), float(Phi[0]), axis
    return split_density(G)


def stokes_from_density(d: PolarizationDensity) -> StokesParams:
    v = d.vector()
    return StokesParams(
        S0=d.S0.copy(), S1=v[:, 1], S2=v[:, 2], S3=v[:, 0], n_samples=d.n_samples, dt=d.dt
    )


def density_from_stokes(s: StokesParams) -> PolarizationDensity:
    G = np.stack([s.S0, s.S3, s.S1, s.S2], axis=-1)
    return PolarizationDensity.from_quaternions(G, n_samples=s.n_samples, dt=s.dt)


def normalized_stokes(d: PolarizationDensity) -> np.ndarray:
    """(s1, s2, s3) = (j, k, i) components of Phi·mu, one row per bin"""
    v = d.Phi[:, None] * d.axes_or_zero()
    return np.stack([v[:, 1], v[:, 2], v[:, 0]], axis=-1)


def density_from_normalized_stokes(
    S0: np.ndarray, Phi: np.ndarray, s: np.ndarray, n_samples: int, dt: float = 1.0
) -> PolarizationDensity:
    """Inverse of ``normalized_stokes``; the axis is taken from the direction of s"""
    s = np.asarray(s, dtype=float)
    axes = np.stack([s[:, 2], s[:, 0], s[:, 1]], axis=-1)
    norms = np.linalg.norm(axes, axis=-1)
    polarized = np.asarray(Phi) >= EPS_POL
    mu = np.full_like(axes, np.nan)
    mu[polarized] = axes[polarized] / norms[polarized, None]
    return PolarizationDensity(S0=S0, Phi=Phi, mu=mu, n_samples=n_samples, dt=dt)


def up_split(d: PolarizationDensity) -> Tuple[PolarizationDensity, PolarizationDensity]:
    """Unpolarized part (1-Phi)·S0 and fully polarized part Phi·S0·(1+mu)"""
    unpolarized = PolarizationDensity(
        S0=(1.0 - d.Phi) * d.S0, Phi=np.zeros(d.size), mu=None, n_samples=d.n_samples, dt=d.dt
    )
    polarized_S0 = d.Phi * d.S0
    polarized = PolarizationDensity(
        S0=polarized_S0,
        Phi=np.where(d.has_axis & (polarized_S0 > 0), 1.0, 0.0),
        mu=d.mu,
        n_samples=d.n_samples,
        dt=d.dt,
    )
    return unpolarized, polarized


def axis_from_ellipse(theta: float, chi: float) -> PureUnitQuaternion:
    """Axis of the ellipse with orientation theta and ellipticity angle chi"""
    return PureUnitQuaternion(
        np.sin(2 * chi), np.cos(2 * chi) * np.cos(2 * theta), np.cos(2 * chi) * np.sin(2 * theta)
    )


def ellipse_from_axis(mu: PureUnitQuaternion) -> Tuple[float, float]:
    """(theta, chi) with theta in (-π/2, π/2] and chi in [-π/4, π/4]"""
    two_theta = np.arctan2(mu.z, mu.y)
    two_chi = np.arcsin(np.clip(mu.x, -1.0, 1.0))
    return float(two_theta / 2), float(two_chi / 2)


def poincare_coordinates(d: PolarizationDensity) -> PoincareCoordinates:
    # 2θ = atan2(s2, s1) and 2χ = arcsin(s3 / Phi); undefined angles are reported as 0
    mu = d.axes_or_zero()
    two_theta = np.where(d.has_axis, np.arctan2(mu[:, 2], mu[:, 1]), 0.0)
    two_chi = np.where(d.has_axis, np.arcsin(np.clip(mu[:, 0], -1.0, 1.0)), 0.0)
    return PoincareCoordinates(
        frequencies=d.frequencies, radius=d.Phi.copy(), two_theta=two_theta, two_chi=two_chi
    )


def estimate_density(realizations: Sequence[BivariateSignal]) -> PolarizationDensity:
    """
    Average periodogram density over realizations, on the half-grid.

    Raises:
        InvalidInputError: no realizations
        GridMismatchError: lengths or sample periods differ
    """
    if len(realizations) == 0:
        raise InvalidInputError("At least one realization is required")
    n = realizations[0].n
    dt = realizations[0].dt
    for index, x in enumerate(realizations):
        if x.n != n:
            raise GridMismatchError(f"Realization {index} has length {x.n}, expected {n}")
        if not np.isclose(x.dt, dt, rtol=1e-12):
            raise GridMismatchError(f"Realization {index} has dt={x.dt}, expected {dt}")

    samples = np.stack([x.samples for x in realizations])
    densities = density_bins(transform_samples(samples), dt)
    mean = np.mean(densities, axis=0)[: half_grid_size(n)]
    logger.debug("density_estimated", realizations=len(realizations), n=n)
    return PolarizationDensity.from_quaternions(mean, n_samples=n, dt=dt)
