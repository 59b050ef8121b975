"""
Quaternion spectral densities and their (S0, Phi, mu) / Stokes parameterizations

Densities are stored on the nonnegative half-grid k = 0..N//2 of an N-point
DFT. Axis rows are NaN where the degree of polarization is below ``EPS_POL``.
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.exceptions import InvalidInputError, NonphysicalDensityError
from app.models.quaternion import normalize_axes, qinner

EPS_POL = 1e-12
PHI_CLIP_TOL = 1e-9
MAP_CLEANUP_TOL = 1e-10


def half_grid_size(n_samples: int) -> int:
    return n_samples // 2 + 1


def mirror_index(n_samples: int) -> Tuple[np.ndarray, np.ndarray]:
    """Half-grid source index and negative-frequency mask for every full-grid bin"""
    k = np.arange(n_samples)
    negative = k > n_samples // 2
    return np.where(negative, n_samples - k, k), negative


def self_mirrored_bins(n_samples: int) -> np.ndarray:
    """DC and, for even N, the Nyquist bin"""
    return np.array([0, n_samples // 2]) if n_samples % 2 == 0 and n_samples > 1 else np.array([0])


def mirror_density_vectors(v: np.ndarray) -> np.ndarray:
    """v(−ν) = −involution(v(ν), i): the i-component flips, j and k stay"""
    out = np.array(v, dtype=float, copy=True)
    out[..., 0] = -out[..., 0]
    return out


def split_density(G: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split (n, 4) quaternion densities into S0, Phi and unit axes (NaN rows when absent)

    Raises:
        NonphysicalDensityError: negative scalar part or |vector| > scalar·(1+1e-9)
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    S0 = G[:, 0]
    V = G[:, 1:]
    if np.any(S0 < 0):
        first = int(np.flatnonzero(S0 < 0)[0])
        raise NonphysicalDensityError(f"nonphysical density: S0 < 0 at bin {first}")
    norms = np.linalg.norm(V, axis=-1)
    excess = norms > S0 * (1.0 + PHI_CLIP_TOL)
    if np.any(excess):
        first = int(np.flatnonzero(excess)[0])
        raise NonphysicalDensityError(
            f"nonphysical density at bin {first}: |vector| {norms[first]:.6g} > scalar {S0[first]:.6g}"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        Phi = np.where(S0 > 0, norms / np.where(S0 > 0, S0, 1.0), 0.0)
    Phi = np.minimum(Phi, 1.0)
    mu = np.full_like(V, np.nan)
    polarized = Phi >= EPS_POL
    mu[polarized] = V[polarized] / norms[polarized, None]
    return S0.copy(), Phi, mu


def sanitize_density(G: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """
    Remove rounding residue from computed densities.

    Negative scalars and vector excess within ``MAP_CLEANUP_TOL * scale`` are
    clipped; anything larger is left for ``split_density`` to reject.
    """
    G = np.array(G, dtype=float, copy=True)
    tol = MAP_CLEANUP_TOL * np.asarray(scale, dtype=float)
    S0 = G[:, 0]
    small_negative = (S0 < 0) & (S0 >= -tol)
    G[small_negative, 0] = 0.0
    norms = np.linalg.norm(G[:, 1:], axis=-1)
    shrink = (norms > G[:, 0]) & (norms - G[:, 0] <= tol)
    if np.any(shrink):
        factor = np.where(norms[shrink] > 0, G[shrink, 0] / norms[shrink], 0.0)
        G[shrink, 1:] *= factor[:, None]
    return G


class PolarizationDensity(BaseModel):
    """Per-bin (S0, Phi, mu) on the half-grid of an N-point DFT with period dt"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    S0: np.ndarray = Field(..., description="Total PSD per bin")
    Phi: np.ndarray = Field(..., description="Degree of polarization per bin")
    mu: np.ndarray = Field(..., description="(n, 3) polarization axes on (i, j, k), NaN if absent")
    n_samples: int = Field(..., ge=1, description="Length N of the underlying DFT grid")
    dt: float = Field(1.0, gt=0, description="Sample period")

    @model_validator(mode="before")
    @classmethod
    def validate_density(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        values: Dict[str, Any] = dict(data)
        n_samples = int(values.get("n_samples", 0))
        if n_samples < 1:
            raise InvalidInputError("n_samples must be >= 1")
        size = half_grid_size(n_samples)

        S0 = np.atleast_1d(np.asarray(values.get("S0"), dtype=float))
        Phi = np.atleast_1d(np.asarray(values.get("Phi"), dtype=float))
        if S0.shape != (size,) or Phi.shape != (size,):
            raise InvalidInputError(
                f"Density arrays must have {size} half-grid bins for N={n_samples}, "
                f"got S0 {S0.shape}, Phi {Phi.shape}"
            )
        if not (np.all(np.isfinite(S0)) and np.all(np.isfinite(Phi))):
            raise InvalidInputError("S0 and Phi must be finite")
        if np.any(S0 < 0):
            raise NonphysicalDensityError(f"S0 < 0 at bin {int(np.flatnonzero(S0 < 0)[0])}")
        if np.any(Phi < 0) or np.any(Phi > 1.0 + PHI_CLIP_TOL):
            bad = int(np.flatnonzero((Phi < 0) | (Phi > 1.0 + PHI_CLIP_TOL))[0])
            raise NonphysicalDensityError(f"Phi={Phi[bad]:.6g} outside [0, 1] at bin {bad}")
        Phi = np.minimum(Phi, 1.0)

        raw_mu = values.get("mu")
        if raw_mu is None:
            raw_mu = np.full((size, 3), np.nan)
        mu = normalize_axes(np.asarray(raw_mu, dtype=float).reshape(-1, 3), allow_missing=True)
        if mu.shape != (size, 3):
            raise InvalidInputError(f"Axis array must have shape ({size}, 3), got {mu.shape}")
        polarized = Phi >= EPS_POL
        missing = polarized & np.isnan(mu[:, 0])
        if np.any(missing):
            first = int(np.flatnonzero(missing)[0])
            raise InvalidInputError(f"axis missing at bin {first} with Phi={Phi[first]:.6g}")
        mu[~polarized] = np.nan

        for arr in (S0, Phi, mu):
            arr.setflags(write=False)
        values.update(S0=S0, Phi=Phi, mu=mu, n_samples=n_samples)
        return values

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_quaternions(cls, G: np.ndarray, n_samples: int, dt: float = 1.0) -> "PolarizationDensity":
        S0, Phi, mu = split_density(G)
        return cls(S0=S0, Phi=Phi, mu=mu, n_samples=n_samples, dt=dt)

    @classmethod
    def flat(
        cls,
        S0: float,
        n_samples: int,
        dt: float = 1.0,
        Phi: float = 0.0,
        mu: Optional[np.ndarray] = None,
    ) -> "PolarizationDensity":
        size = half_grid_size(n_samples)
        axis = np.full((size, 3), np.nan) if mu is None else np.tile(np.asarray(mu, float), (size, 1))
        return cls(
            S0=np.full(size, float(S0)), Phi=np.full(size, float(Phi)), mu=axis,
            n_samples=n_samples, dt=dt,
        )

    # -- grid -------------------------------------------------------------

    @property
    def size(self) -> int:
        return int(self.S0.shape[0])

    @property
    def df(self) -> float:
        return 1.0 / (self.n_samples * self.dt)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.size) * self.df

    @property
    def has_axis(self) -> np.ndarray:
        return ~np.isnan(self.mu[:, 0])

    def same_grid(self, other: "PolarizationDensity") -> bool:
        return self.n_samples == other.n_samples and np.isclose(self.dt, other.dt, rtol=1e-12)

    # -- views ------------------------------------------------------------

    def axes_or_zero(self) -> np.ndarray:
        return np.nan_to_num(self.mu, nan=0.0)

    def vector(self) -> np.ndarray:
        """S0·Phi·mu, zero where the axis is absent"""
        return (self.S0 * self.Phi)[:, None] * self.axes_or_zero()

    def to_quaternions(self) -> np.ndarray:
        return np.concatenate([self.S0[:, None], self.vector()], axis=-1)

    def full_grid_quaternions(self) -> np.ndarray:
        """Symmetry extension to all N bins (natural DFT order)"""
        src, negative = mirror_index(self.n_samples)
        G = self.to_quaternions()[src]
        G[negative, 1:] = mirror_density_vectors(G[negative, 1:])
        return G

    def total_power(self) -> float:
        """Σ S0·Δν over the full grid, i.e. the average power of the process"""
        src, _ = mirror_index(self.n_samples)
        return float(np.sum(self.S0[src]) * self.df)

    def alignment(self, axis: np.ndarray) -> np.ndarray:
        """⟨mu, axis⟩ per bin, NaN where the axis is absent"""
        return np.where(self.has_axis, qinner(self.axes_or_zero(), np.asarray(axis, float)), np.nan)


class StokesParams(BaseModel):
    """(S0, S1, S2, S3) per half-grid bin, with S0·Phi·mu = i S3 + j S1 + k S2"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    S0: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray
    n_samples: int = Field(..., ge=1)
    dt: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def validate_stokes(self) -> "StokesParams":
        shapes = {np.shape(a) for a in (self.S0, self.S1, self.S2, self.S3)}
        if len(shapes) != 1:
            raise InvalidInputError(f"Stokes arrays differ in shape: {sorted(shapes)}")
        polarized = np.sqrt(self.S1**2 + self.S2**2 + self.S3**2)
        if np.any(polarized > np.asarray(self.S0) * (1.0 + PHI_CLIP_TOL)):
            raise NonphysicalDensityError("Stokes vector exceeds S0")
        return self


class PoincareCoordinates(BaseModel):
    """Spherical coordinates of Phi·mu: radius Phi, longitude 2θ, latitude 2χ"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frequencies: np.ndarray
    radius: np.ndarray
    two_theta: np.ndarray
    two_chi: np.ndarray
