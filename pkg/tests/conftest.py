"""
Test configuration and fixtures for BivQFT tests
"""

from typing import Callable

import numpy as np
import pytest
import structlog

from app.models.densities import PolarizationDensity, half_grid_size
from app.models.signals import BivariateSignal, QSpectrum
from app.services.qft import qft_forward
from app.services.spectral import axis_from_ellipse
from app.utils.logging_config import configure_logging

configure_logging("WARNING")


# Test data samples
class TestData:
    """Test data constants and experiment parameters"""

    SEED = 20240611

    # Grids
    SMALL_N = 64
    DEFAULT_N = 256
    ODD_N = 255
    PARSEVAL_SIZES = [255, 256, 4096]

    # Narrow-band experiment (synthesis, Wiener)
    EXPERIMENT_N = 1024
    OVERSAMPLE = 10.0
    NU0 = 0.02
    BUMP_WIDTH = 0.004
    PHI_STAR = 0.7
    THETA_STAR = np.pi / 4
    CHI_STAR = np.pi / 8
    SYNTH_BUMP_WIDTH = 0.008
    SYNTH_REALIZATIONS = 200
    SYNTH_S0_TOL = 0.05
    OVERSAMPLE_LADDER = [1.0, 2.0, 10.0]

    # Wiener experiment
    INPUT_SNR_DB = -5.0
    NOISE_PHI = 0.4
    NOISE_THETA = np.pi / 2
    NOISE_SEEDS = 50
    REFERENCE_SNR_DB = 9.92
    SNR_TOLERANCE_DB = 1.5

    # Decomposition experiment
    DECOMP_N = 256
    DECOMP_NU0 = 0.1
    DECOMP_WIDTH = 0.02
    DECOMP_REALIZATIONS = 400

    # Tolerances
    EXACT_TOL = 1e-12
    ALGEBRA_TOL = 1e-10


def gaussian_bump(frequencies: np.ndarray, nu0: float, width: float) -> np.ndarray:
    return np.exp(-((frequencies - nu0) ** 2) / (2.0 * width**2))


def bump_density(
    n: int, nu0: float, width: float, phi: float, axis: np.ndarray, dt: float = 1.0
) -> PolarizationDensity:
    """Gaussian PSD bump with constant degree of polarization and axis"""
    size = half_grid_size(n)
    frequencies = np.arange(size) / (n * dt)
    return PolarizationDensity(
        S0=gaussian_bump(frequencies, nu0, width),
        Phi=np.full(size, phi),
        mu=np.tile(axis, (size, 1)),
        n_samples=n,
        dt=dt,
    )


def random_axes(rng: np.random.Generator, size: int) -> np.ndarray:
    v = rng.standard_normal((size, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator, fresh per test"""
    return np.random.default_rng(TestData.SEED)


@pytest.fixture
def make_signal(rng) -> Callable[..., BivariateSignal]:
    def _make(n: int = TestData.DEFAULT_N, dt: float = 1.0) -> BivariateSignal:
        return BivariateSignal(samples=rng.standard_normal((n, 2)), dt=dt)

    return _make


@pytest.fixture
def make_spectrum(make_signal) -> Callable[..., QSpectrum]:
    """Spectra of random real signals (i-Hermitian by construction)"""

    def _make(n: int = TestData.DEFAULT_N, dt: float = 1.0) -> QSpectrum:
        return qft_forward(make_signal(n, dt))

    return _make


@pytest.fixture
def make_density(rng) -> Callable[..., PolarizationDensity]:
    """Random valid densities with Phi in [0, 0.95]"""

    def _make(n: int = TestData.DEFAULT_N, dt: float = 1.0) -> PolarizationDensity:
        size = half_grid_size(n)
        return PolarizationDensity(
            S0=rng.uniform(0.1, 2.0, size),
            Phi=rng.uniform(0.0, 0.95, size),
            mu=random_axes(rng, size),
            n_samples=n,
            dt=dt,
        )

    return _make


@pytest.fixture
def experiment_axis() -> np.ndarray:
    return axis_from_ellipse(TestData.THETA_STAR, TestData.CHI_STAR).to_array()


@pytest.fixture
def narrowband_target(experiment_axis) -> PolarizationDensity:
    """Partially polarized bump around the normalized frequency 0.02"""
    return bump_density(
        TestData.EXPERIMENT_N, TestData.NU0, TestData.BUMP_WIDTH, TestData.PHI_STAR, experiment_axis
    )


@pytest.fixture
def synthesis_target(experiment_axis) -> PolarizationDensity:
    """Wider bump used for the synthesis acceptance checks"""
    return bump_density(
        TestData.EXPERIMENT_N, TestData.NU0, TestData.SYNTH_BUMP_WIDTH, TestData.PHI_STAR, experiment_axis
    )


@pytest.fixture
def decomposition_target(experiment_axis) -> PolarizationDensity:
    return bump_density(
        TestData.DECOMP_N, TestData.DECOMP_NU0, TestData.DECOMP_WIDTH, TestData.PHI_STAR, experiment_axis
    )


@pytest.fixture
def log():
    return structlog.get_logger("tests")


# Utility functions for tests
def relative_error(actual: np.ndarray, expected: np.ndarray) -> float:
    """max |actual - expected| / max |expected|"""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = float(np.max(np.abs(expected)))
    diff = float(np.max(np.abs(actual - expected)))
    return diff / scale if scale > 0 else diff


def assert_close(actual, expected, tol: float = TestData.ALGEBRA_TOL, what: str = "value"):
    err = relative_error(actual, expected)
    assert err <= tol, f"{what}: relative error {err:.3e} exceeds {tol:.1e}"


def assert_valid_density(d: PolarizationDensity):
    """Assert the basic physical constraints of a density"""
    assert np.all(d.S0 >= 0), "S0 must be nonnegative"
    assert np.all((d.Phi >= 0) & (d.Phi <= 1)), "Phi must lie in [0, 1]"
    norms = np.linalg.norm(d.mu[d.has_axis], axis=-1)
    assert np.allclose(norms, 1.0, atol=1e-12), "Axes must be unit vectors"


def band_mask(d: PolarizationDensity, fraction: float = 0.5) -> np.ndarray:
    """Bins where S0 is at least ``fraction`` of its maximum"""
    return d.S0 >= fraction * np.max(d.S0)


def bump_autocovariance(n: int, nu0: float, width: float, oversample: int = 64) -> np.ndarray:
    """Lags 0..n-1 of the S0 autocovariance of a Gaussian bump, evaluated on a fine grid (dt = 1)"""
    nu = np.fft.fftfreq(oversample * n)
    return np.real(np.fft.ifft(gaussian_bump(np.abs(nu), nu0, width)))[:n]


def sample_autocovariance(signals) -> np.ndarray:
    """Realization-averaged unbiased lag covariance E[x(t + tau) . x(t)] for lags 0..n-1"""
    x = np.stack([s.samples for s in signals])
    n = x.shape[1]
    power = np.sum(np.abs(np.fft.fft(x, 2 * n, axis=1)) ** 2, axis=-1)
    lagged = np.real(np.fft.ifft(power, axis=1))[:, :n]
    return np.mean(lagged, axis=0) / (n - np.arange(n))
