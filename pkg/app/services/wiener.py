"""
Quaternion-domain Wiener denoising of y = x + w with known densities

The estimate is the matrix Wiener filter P_xx P_yy⁻¹ written bin-wise with
quaternions. With vx = Phi_x mu_x and vy = Phi_y mu_y:

    X̂ = c [(1 - ⟨vx, vy⟩) Y + (vx × vy) Y - (vx - vy) Y j],
    c  = S0_x / (S0_y (1 - Phi_y²))

The cross-product term vanishes for parallel axes, where the filter is a
Hermitian filter.
"""

from typing import Any, Dict, NamedTuple, Optional, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from app.exceptions import GridMismatchError, InvalidInputError, NumericalFailureError
from app.models.densities import PolarizationDensity, mirror_index
from app.models.filters import HermitianFilterParams
from app.models.noise import WhiteNoiseSpec
from app.models.problems import DenoisingProblem
from app.models.quaternion import UNIT_J, pure, qmul
from app.models.signals import BivariateSignal, QSpectrum
from app.services.lti_filters import apply_hermitian, project_self_mirrored
from app.services.qft import qft_forward, qft_inverse
from app.services.synthesis import expected_density, white_noise

logger = structlog.get_logger(__name__)

SINGULAR_TOL = 1e-12
WIENER_PHI_CAP = 1.0 - 1e-9
ROUNDOFF_ULPS = 64.0


class WienerCoefficients(BaseModel):
    """Per-bin terms of the Wiener estimate on the full N-point grid"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    scalar: np.ndarray  # c (1 - ⟨vx, vy⟩)
    left: np.ndarray  # c (vx × vy), multiplies Y from the left
    right: np.ndarray  # c (vx - vy), multiplies Y j from the left
    regularized: np.ndarray  # bins where Phi_y was capped


class MMSEResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frequencies: np.ndarray
    per_bin: np.ndarray
    total: float
    regularized_bins: int


class NoisyObservation(NamedTuple):
    y: BivariateSignal
    noise: BivariateSignal
    Gww: PolarizationDensity


def _vectors(G: np.ndarray):
    """S0 and normalized vectors Phi·mu of (n, 4) densities, zero vectors where S0 = 0"""
    S0 = G[:, 0]
    safe = np.where(S0 > 0, S0, 1.0)
    v = np.where((S0 > 0)[:, None], G[:, 1:] / safe[:, None], 0.0)
    return S0, v


def _terms(Gxx: np.ndarray, Gyy: np.ndarray):
    S0x, vx = _vectors(Gxx)
    S0y, vy = _vectors(Gyy)

    phi_y = np.linalg.norm(vy, axis=-1)
    regularized = (S0y > 0) & (1.0 - phi_y**2 < SINGULAR_TOL)
    if np.any(regularized):
        vy = vy.copy()
        vy[regularized] *= (WIENER_PHI_CAP / phi_y[regularized])[:, None]
        phi_y = np.linalg.norm(vy, axis=-1)
    active = S0y > 0
    c = np.where(active, S0x / np.where(active, S0y * (1.0 - phi_y**2), 1.0), 0.0)
    return S0x, vx, S0y, vy, c, regularized


def wiener_coefficients(prob: DenoisingProblem) -> WienerCoefficients:
    """Filter terms for every bin of the N-point grid, negative frequencies by symmetry"""
    Gxx = prob.Gxx.full_grid_quaternions()
    Gyy = prob.Gyy.full_grid_quaternions()
    _, vx, _, vy, c, regularized = _terms(Gxx, Gyy)
    if np.any(regularized):
        logger.warning("wiener_phi_regularized", bins=int(np.sum(regularized)), cap=WIENER_PHI_CAP)
    return WienerCoefficients(
        scalar=c * (1.0 - np.sum(vx * vy, axis=-1)),
        left=c[:, None] * np.cross(vx, vy),
        right=c[:, None] * (vx - vy),
        regularized=regularized,
    )


def _check_grid(Y: QSpectrum, d: PolarizationDensity) -> None:
    if Y.n != d.n_samples or not np.isclose(Y.dt, d.dt, rtol=1e-12):
        raise GridMismatchError(
            f"grid mismatch: spectrum (N={Y.n}, dt={Y.dt}) vs densities (N={d.n_samples}, dt={d.dt})"
        )


def wiener_apply(Y: QSpectrum, prob: DenoisingProblem) -> QSpectrum:
    _check_grid(Y, prob.Gxx)
    w = wiener_coefficients(prob)
    X = (
        w.scalar[:, None] * Y.bins
        + qmul(pure(w.left), Y.bins)
        - qmul(qmul(pure(w.right), Y.bins), UNIT_J)
    )
    return QSpectrum(bins=project_self_mirrored(X, Y.n), dt=Y.dt)


def unpolarized_noise_filter(
    S0x: np.ndarray, Phix: np.ndarray, mux: np.ndarray, sigma2: Union[float, np.ndarray]
) -> HermitianFilterParams:
    """
    Hermitian form of the Wiener filter for unpolarized noise of density sigma2.

    With alpha = S0x / sigma2:
        K   = (alpha + alpha²(1 - Phi²)) / (1 + 2 alpha + alpha²(1 - Phi²))
        eta = Phi / (1 + alpha (1 - Phi²))
    """
    sigma2 = np.broadcast_to(np.asarray(sigma2, dtype=float), np.shape(S0x))
    if np.any(sigma2 <= 0):
        raise InvalidInputError("sigma2 must be > 0")
    S0x = np.asarray(S0x, dtype=float)
    Phix = np.asarray(Phix, dtype=float)
    alpha = S0x / sigma2
    depol = 1.0 - Phix**2
    K = (alpha + alpha**2 * depol) / (1.0 + 2.0 * alpha + alpha**2 * depol)
    eta = Phix / (1.0 + alpha * depol)
    mu = np.asarray(mux, dtype=float)
    eta = np.where(np.isnan(mu[:, 0]), 0.0, eta)
    return HermitianFilterParams(K=K, eta=eta, mu=mu)


def wiener_unpolarized_noise(
    Y: QSpectrum, S0x: np.ndarray, Phix: np.ndarray, mux: np.ndarray, sigma2: Union[float, np.ndarray]
) -> QSpectrum:
    """Wiener estimate for unpolarized noise, parameters on the half-grid"""
    return apply_hermitian(Y, unpolarized_noise_filter(S0x, Phix, mux, sigma2))


def bound_minimum_error(
    eps: np.ndarray, S0x: np.ndarray, depolarization: np.ndarray, exempt: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Clip per-bin errors to [0, S0_x], allowing only round-off sized excursions.

    The allowance scales with 1 / (1 - Phi_y²), the conditioning of the
    observation form. Bins in ``exempt`` (regularized Phi_y) are clipped
    without a check.

    Raises:
        NumericalFailureError: an error outside [0, S0_x] by more than round-off
    """
    eps = np.asarray(eps, dtype=float)
    S0x = np.asarray(S0x, dtype=float)
    allowance = ROUNDOFF_ULPS * np.finfo(float).eps * S0x / np.clip(depolarization, SINGULAR_TOL, None)
    outside = (eps < -allowance) | (eps > S0x + allowance)
    if exempt is not None:
        outside &= ~exempt
    if np.any(outside):
        k = int(np.flatnonzero(outside)[0])
        raise NumericalFailureError(f"minimum error {eps[k]:.6g} outside [0, {S0x[k]:.6g}] at bin {k}")
    return np.clip(eps, 0.0, S0x)


def mmse(prob: DenoisingProblem) -> MMSEResult:
    """
    Per-bin minimum error S0_x [1 - (S0_x/S0_y)(1 + Phi_x² - 2⟨vx, vy⟩)/(1 - Phi_y²)]
    and its integral over the full grid.
    """
    S0x, vx, S0y, vy, _, regularized = _terms(prob.Gxx.to_quaternions(), prob.Gyy.to_quaternions())
    phi_x2 = np.sum(vx**2, axis=-1)
    phi_y2 = np.sum(vy**2, axis=-1)
    active = S0y > 0
    ratio = np.where(active, S0x / np.where(active, S0y, 1.0), 0.0)
    eps = S0x * (1.0 - ratio * (1.0 + phi_x2 - 2.0 * np.sum(vx * vy, axis=-1)) / (1.0 - phi_y2))
    eps = bound_minimum_error(np.where(active, eps, 0.0), S0x, 1.0 - phi_y2, exempt=regularized)

    src, _ = mirror_index(prob.n_samples)
    total = float(np.sum(eps[src]) * prob.Gxx.df)
    return MMSEResult(
        frequencies=prob.Gxx.frequencies,
        per_bin=eps,
        total=total,
        regularized_bins=int(np.sum(regularized)),
    )


def mmse_signal_noise_form(prob: DenoisingProblem) -> np.ndarray:
    """
    Per-bin minimum error from the signal and noise attributes, alpha = S0_x/S0_w:

        S0_x (1 - Phi_w² + alpha(1 - Phi_x²))
        / (1 - Phi_w² + alpha²(1 - Phi_x²) + 2 alpha (1 - Phi_x Phi_w ⟨mu_x, mu_w⟩))

    NaN where S0_w = 0.
    """
    Gxx, Gww = prob.Gxx, prob.Gww
    alignment = np.where(
        Gxx.has_axis & Gww.has_axis, np.sum(Gxx.axes_or_zero() * Gww.axes_or_zero(), axis=-1), 0.0
    )
    defined = Gww.S0 > 0
    alpha = np.where(defined, Gxx.S0 / np.where(defined, Gww.S0, 1.0), np.nan)
    dx = 1.0 - Gxx.Phi**2
    dw = 1.0 - Gww.Phi**2
    num = Gxx.S0 * (dw + alpha * dx)
    den = dw + alpha**2 * dx + 2.0 * alpha * (1.0 - Gxx.Phi * Gww.Phi * alignment)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(defined, num / den, np.nan)


def denoise(y: BivariateSignal, prob: DenoisingProblem) -> BivariateSignal:
    result = qft_inverse(wiener_apply(qft_forward(y), prob))
    if result.non_bivariate:
        raise NumericalFailureError(
            f"Wiener estimate is not a bivariate signal (residual fraction {result.residual_fraction:.3g})"
        )
    return result.signal


def reconstruction_snr_db(x: BivariateSignal, x_hat: BivariateSignal) -> float:
    """10·log10(‖x‖² / ‖x̂ - x‖²); +inf for a perfect reconstruction"""
    if x.n != x_hat.n:
        raise GridMismatchError(f"Signal lengths differ: {x.n} vs {x_hat.n}")
    error = float(np.sum((x_hat.samples - x.samples) ** 2))
    energy = float(np.sum(x.samples**2))
    if error == 0:
        return float("inf")
    if energy == 0:
        return float("-inf")
    return float(10.0 * np.log10(energy / error))


def add_noise_at_snr(
    x: BivariateSignal,
    snr_db: float,
    Phi: float = 0.0,
    theta: float = 0.0,
    seed: int = 0,
    index: Optional[int] = None,
    signal_power: Optional[float] = None,
) -> NoisyObservation:
    """
    Add polarized white noise whose variance sets the requested input SNR.

    The reference power is the measured power of x unless ``signal_power`` is
    given (for instance the total power of a known density).
    """
    power = x.power() if signal_power is None else float(signal_power)
    if power <= 0:
        raise InvalidInputError("Signal power must be > 0 to set an SNR")
    spec = WhiteNoiseSpec.polarized(S0w=power / 10.0 ** (snr_db / 10.0), Phi=Phi, theta=theta)
    w = white_noise(spec, x.n, seed=seed, dt=x.dt, index=index)
    return NoisyObservation(y=x + w, noise=w, Gww=expected_density(spec, x.n, x.dt))


class WienerDenoiser:
    """Wiener estimator for a fixed denoising problem"""

    def __init__(self, problem: DenoisingProblem):
        self.problem = problem
        self.logger = structlog.get_logger(__name__).bind(component="WienerDenoiser")
        self._mmse: Optional[MMSEResult] = None

    def denoise(self, y: BivariateSignal) -> BivariateSignal:
        x_hat = denoise(y, self.problem)
        self.logger.debug("denoised", n=y.n)
        return x_hat

    def mmse(self) -> MMSEResult:
        if self._mmse is None:
            self._mmse = mmse(self.problem)
        return self._mmse

    def empirical_error(self, x: BivariateSignal, x_hat: BivariateSignal) -> float:
        """Average power of x̂ - x, comparable to ``mmse().total``"""
        if x.n != x_hat.n:
            raise GridMismatchError(f"Signal lengths differ: {x.n} vs {x_hat.n}")
        return float(np.mean(np.sum((x_hat.samples - x.samples) ** 2, axis=-1)))

    def describe(self) -> Dict[str, Any]:
        result = self.mmse()
        return {
            "n_samples": self.problem.n_samples,
            "signal_power": self.problem.Gxx.total_power(),
            "noise_power": self.problem.Gww.total_power(),
            "mmse": result.total,
            "regularized_bins": result.regularized_bins,
        }
