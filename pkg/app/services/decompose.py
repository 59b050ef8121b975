"""
Two-component decompositions x = x_a + x_b built from a polarizer along mu_x

    X_a = K (X - mu_x X j),    X_b = X - X_a

The homogeneous gain K selects the decomposition (see ``DecompositionMode``).
Bins without a polarization axis pass entirely to x_b.
"""

from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict

from app.exceptions import GridMismatchError, InvalidInputError
from app.models.densities import PolarizationDensity, half_grid_size, sanitize_density
from app.models.filters import HermitianFilterParams
from app.models.problems import DecompositionMode
from app.models.quaternion import UNIT_J, qconj, qmul
from app.models.signals import BivariateSignal
from app.services.lti_filters import apply_hermitian
from app.services.qft import qft_forward, qft_inverse, transform_samples

logger = structlog.get_logger(__name__)

ModeLike = Union[DecompositionMode, str]


class CorrelationStatistic(BaseModel):
    """
    Normalized cross-spectral statistics of paired realizations on the half-grid

    scalar = |mean(A conj B)| / sqrt(mean|A|² mean|B|²)
    polar  = |mean(A j conj B)| / sqrt(mean|A|² mean|B|²)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frequencies: np.ndarray
    scalar: np.ndarray
    polar: np.ndarray
    realizations: int

    @property
    def statistic(self) -> np.ndarray:
        return np.maximum(self.scalar, self.polar)

    @property
    def threshold(self) -> float:
        return 3.0 / np.sqrt(self.realizations)

    @property
    def fraction_below_threshold(self) -> float:
        stat = self.statistic
        finite = np.isfinite(stat)
        if not np.any(finite):
            return float("nan")
        return float(np.mean(stat[finite] < self.threshold))


def _mode(mode: ModeLike) -> DecompositionMode:
    try:
        return DecompositionMode(mode)
    except ValueError:
        raise InvalidInputError(f"Unknown decomposition mode: {mode!r} (expected i, ii or iii)") from None


def decomposition_gain(d: PolarizationDensity, mode: ModeLike) -> np.ndarray:
    """
    Gain K per bin:
        (i)   sqrt(Phi / (2 (1 + Phi)))
        (ii)  Phi / (1 + sqrt(1 - Phi²) + Phi), equal to 1 - Phi/(Phi + 1 - sqrt(1 - Phi²))
        (iii) 1/2
    """
    mode = _mode(mode)
    Phi = d.Phi
    if mode is DecompositionMode.POLARIZED_PART_POWER:
        return np.sqrt(Phi / (2.0 * (1.0 + Phi)))
    if mode is DecompositionMode.UNPOLARIZED_REMAINDER:
        return Phi / (1.0 + np.sqrt(np.clip(1.0 - Phi**2, 0.0, None)) + Phi)
    return np.full(d.size, 0.5)


def branch_filters(d: PolarizationDensity, mode: ModeLike) -> Tuple[HermitianFilterParams, HermitianFilterParams]:
    """
    Hermitian descriptions of both branches:
    x_a = (K, 1, mu_x) and x_b = (1 - K, K / (1 - K), -mu_x)
    """
    K = np.where(d.has_axis, decomposition_gain(d, mode), 0.0)
    eta_a = np.where(d.has_axis, 1.0, 0.0)
    branch_a = HermitianFilterParams(K=K, eta=eta_a, mu=d.mu)
    branch_b = HermitianFilterParams(K=1.0 - K, eta=K / (1.0 - K), mu=-d.mu)
    return branch_a, branch_b


def _check_density_grid(x: BivariateSignal, d: PolarizationDensity) -> None:
    if x.n != d.n_samples or not np.isclose(x.dt, d.dt, rtol=1e-12):
        raise GridMismatchError(
            f"grid mismatch: signal (N={x.n}, dt={x.dt}) vs density (N={d.n_samples}, dt={d.dt})"
        )


def decompose_signal(
    x: BivariateSignal, d: PolarizationDensity, mode: ModeLike
) -> Tuple[BivariateSignal, BivariateSignal]:
    _check_density_grid(x, d)
    branch_a, _ = branch_filters(d, mode)
    x_a = qft_inverse(apply_hermitian(qft_forward(x), branch_a)).signal
    x_b = BivariateSignal(samples=x.samples - x_a.samples, dt=x.dt)
    return x_a, x_b


def component_densities(
    d: PolarizationDensity, mode: ModeLike
) -> Tuple[PolarizationDensity, PolarizationDensity]:
    """
    Closed-form densities of x_a and x_b.

    (i)   d_a = S0 Phi (1 + mu);  d_b = S0 [kappa + (2 Phi - 2 (1 + Phi) K) mu],
          kappa = (1 + Phi)(1 - 2K)
    (ii)  d_a = 2 S0 K² (1 + Phi)(1 + mu);  d_b = S0 (1 - Phi)
    (iii) d_a = (S0/2)(1 + Phi)(1 + mu);  d_b = (S0/2)(1 - Phi)(1 - mu)
    """
    mode = _mode(mode)
    S0, Phi = d.S0, d.Phi
    mu = d.axes_or_zero()
    K = decomposition_gain(d, mode)

    if mode is DecompositionMode.POLARIZED_PART_POWER:
        s_a, v_a = S0 * Phi, S0 * Phi
        s_b = S0 * (1.0 + Phi) * (1.0 - 2.0 * K)
        v_b = S0 * (2.0 * Phi - 2.0 * (1.0 + Phi) * K)
    elif mode is DecompositionMode.UNPOLARIZED_REMAINDER:
        s_a = v_a = 2.0 * S0 * K**2 * (1.0 + Phi)
        s_b, v_b = S0 * (1.0 - Phi), np.zeros_like(S0)
    else:
        s_a = v_a = 0.5 * S0 * (1.0 + Phi)
        s_b, v_b = 0.5 * S0 * (1.0 - Phi), -0.5 * S0 * (1.0 - Phi)

    absent = ~d.has_axis
    s_a, v_a = np.where(absent, 0.0, s_a), np.where(absent, 0.0, v_a)
    s_b, v_b = np.where(absent, S0, s_b), np.where(absent, 0.0, v_b)

    G_a = np.concatenate([s_a[:, None], v_a[:, None] * mu], axis=-1)
    G_b = np.concatenate([s_b[:, None], v_b[:, None] * mu], axis=-1)
    d_a = PolarizationDensity.from_quaternions(sanitize_density(G_a, scale=S0), d.n_samples, d.dt)
    d_b = PolarizationDensity.from_quaternions(sanitize_density(G_b, scale=S0), d.n_samples, d.dt)
    return d_a, d_b


def _stack(signals: Sequence[BivariateSignal], n: int, what: str) -> np.ndarray:
    for index, s in enumerate(signals):
        if s.n != n:
            raise GridMismatchError(f"{what} realization {index} has length {s.n}, expected {n}")
    return np.stack([s.samples for s in signals])


def test_uncorrelated(a: Sequence[BivariateSignal], b: Sequence[BivariateSignal]) -> CorrelationStatistic:
    """
    Monte-Carlo check of E[X_a conj X_b] = E[X_a j conj X_b] = 0 per bin.

    Bins where either component carries no power are NaN.
    """
    if len(a) != len(b):
        raise InvalidInputError(f"Realization counts differ: {len(a)} vs {len(b)}")
    if len(a) == 0:
        raise InvalidInputError("At least one realization pair is required")
    n = a[0].n
    A = transform_samples(_stack(a, n, "first"))
    B = transform_samples(_stack(b, n, "second"))
    half = half_grid_size(n)
    A, B = A[:, :half], B[:, :half]

    conj_B = qconj(B)
    scalar_cross = np.mean(qmul(A, conj_B), axis=0)
    polar_cross = np.mean(qmul(qmul(A, UNIT_J), conj_B), axis=0)
    power = np.mean(np.sum(A**2, axis=-1), axis=0) * np.mean(np.sum(B**2, axis=-1), axis=0)
    defined = power > 0
    norm = np.sqrt(np.where(defined, power, 1.0))
    scalar = np.where(defined, np.linalg.norm(scalar_cross, axis=-1) / norm, np.nan)
    polar = np.where(defined, np.linalg.norm(polar_cross, axis=-1) / norm, np.nan)
    return CorrelationStatistic(
        frequencies=np.arange(half) / (n * a[0].dt), scalar=scalar, polar=polar, realizations=len(a)
    )


# pytest would otherwise collect the function above as a test
test_uncorrelated.__test__ = False  # type: ignore[attr-defined]


class SignalDecomposer:
    """Decomposition of signals described by a fixed density"""

    def __init__(self, density: PolarizationDensity, mode: ModeLike):
        self.density = density
        self.mode = _mode(mode)
        self.logger = structlog.get_logger(__name__).bind(component="SignalDecomposer", mode=self.mode.value)

    def decompose(self, x: BivariateSignal) -> Tuple[BivariateSignal, BivariateSignal]:
        return decompose_signal(x, self.density, self.mode)

    def decompose_batch(
        self, signals: Sequence[BivariateSignal]
    ) -> Tuple[List[BivariateSignal], List[BivariateSignal]]:
        parts = [self.decompose(x) for x in signals]
        self.logger.info("decomposed", realizations=len(parts))
        return [p[0] for p in parts], [p[1] for p in parts]

    def component_densities(self) -> Tuple[PolarizationDensity, PolarizationDensity]:
        return component_densities(self.density, self.mode)

    def correlation(self, signals: Sequence[BivariateSignal]) -> CorrelationStatistic:
        a, b = self.decompose_batch(signals)
        return test_uncorrelated(a, b)

    def describe(self) -> Dict[str, Any]:
        K = decomposition_gain(self.density, self.mode)
        return {
            "mode": self.mode.value,
            "description": self.mode.description,
            "n_samples": self.density.n_samples,
            "gain_min": float(np.min(K)),
            "gain_max": float(np.max(K)),
        }
