"""
Filter descriptions on the nonnegative-frequency half-grid

The filtering services perform the extension to negative frequencies.
"""

from typing import Any, Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.exceptions import InvalidInputError
from app.models.quaternion import normalize_axes

ETA_CLIP_TOL = 1e-12


def _vector(values: Any, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} must be one value per bin, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} must be finite")
    return arr


class UnitaryFilterParams(BaseModel):
    """
    Birefringence filter Y = exp(mu·alpha/2) X exp(j·phi) per bin.

    alpha is brought to [0, 2π); a 2π shift of alpha flips the sign of the
    left factor, which is absorbed into phi + π.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mu: np.ndarray = Field(..., description="(n, 3) birefringence axes")
    alpha: np.ndarray = Field(..., description="Birefringence angle per bin (radians)")
    phi: np.ndarray = Field(..., description="Phase per bin (radians)")

    @model_validator(mode="before")
    @classmethod
    def validate_params(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        values: Dict[str, Any] = dict(data)
        alpha = _vector(values.get("alpha"), "alpha")
        phi = _vector(values.get("phi"), "phi")
        mu = normalize_axes(np.asarray(values.get("mu"), dtype=float).reshape(-1, 3))
        if not (mu.shape[0] == alpha.shape[0] == phi.shape[0]):
            raise InvalidInputError(
                f"Unitary parameter lengths differ: mu {mu.shape[0]}, alpha {alpha.shape[0]}, phi {phi.shape[0]}"
            )
        alpha = np.mod(alpha, 4 * np.pi)
        upper = alpha >= 2 * np.pi
        alpha = np.where(upper, alpha - 2 * np.pi, alpha)
        phi = np.where(upper, phi + np.pi, phi)
        for arr in (mu, alpha, phi):
            arr.setflags(write=False)
        values.update(mu=mu, alpha=alpha, phi=phi)
        return values

    @classmethod
    def identity(cls, size: int) -> "UnitaryFilterParams":
        return cls(mu=np.tile([0.0, 1.0, 0.0], (size, 1)), alpha=np.zeros(size), phi=np.zeros(size))

    @property
    def size(self) -> int:
        return int(self.alpha.shape[0])


class HermitianFilterParams(BaseModel):
    """Diattenuation filter Y = K [X - eta·mu·X·j] per bin"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    K: np.ndarray = Field(..., description="Homogeneous gain per bin (>= 0)")
    eta: np.ndarray = Field(..., description="Polarizing power per bin in [0, 1]")
    mu: np.ndarray = Field(..., description="(n, 3) diattenuation axes, NaN allowed where eta = 0")

    @model_validator(mode="before")
    @classmethod
    def validate_params(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        values: Dict[str, Any] = dict(data)
        K = _vector(values.get("K"), "K")
        eta = _vector(values.get("eta"), "eta")
        raw_mu = values.get("mu")
        if raw_mu is None:
            raw_mu = np.full((K.shape[0], 3), np.nan)
        mu = normalize_axes(np.asarray(raw_mu, dtype=float).reshape(-1, 3), allow_missing=True)
        if not (mu.shape[0] == K.shape[0] == eta.shape[0]):
            raise InvalidInputError(
                f"Hermitian parameter lengths differ: K {K.shape[0]}, eta {eta.shape[0]}, mu {mu.shape[0]}"
            )
        if np.any(K < 0):
            raise InvalidInputError(f"K must be >= 0 (bin {int(np.flatnonzero(K < 0)[0])})")
        if np.any(eta < -ETA_CLIP_TOL) or np.any(eta > 1 + ETA_CLIP_TOL):
            raise InvalidInputError("eta must lie in [0, 1]")
        eta = np.clip(eta, 0.0, 1.0)
        absent = np.isnan(mu[:, 0])
        if np.any(absent & (eta > 0)):
            first = int(np.flatnonzero(absent & (eta > 0))[0])
            raise InvalidInputError(f"eta > 0 with absent mu at bin {first}")
        for arr in (K, eta, mu):
            arr.setflags(write=False)
        values.update(K=K, eta=eta, mu=mu)
        return values

    @classmethod
    def gain_only(cls, K: np.ndarray) -> "HermitianFilterParams":
        K = np.asarray(K, dtype=float)
        return cls(K=K, eta=np.zeros_like(K), mu=None)

    @property
    def size(self) -> int:
        return int(self.K.shape[0])

    @property
    def has_axis(self) -> np.ndarray:
        return ~np.isnan(self.mu[:, 0])

    def axes_or_zero(self) -> np.ndarray:
        return np.nan_to_num(self.mu, nan=0.0)


class MatrixFilter(BaseModel):
    """Per-bin 2×2 matrices [[a, b], [c, d]] over the j-subfield acting on (X1, X2)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrices: np.ndarray = Field(..., description="(n, 2, 2) complex matrices")

    @model_validator(mode="before")
    @classmethod
    def validate_matrices(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        values: Dict[str, Any] = dict(data)
        M = np.asarray(values.get("matrices"), dtype=complex)
        if M.ndim == 2:
            M = M[None]
        if M.ndim != 3 or M.shape[1:] != (2, 2):
            raise InvalidInputError(f"Matrices must have shape (n, 2, 2), got {M.shape}")
        if not np.all(np.isfinite(M)):
            raise InvalidInputError("Matrix entries must be finite")
        M = M.copy()
        M.setflags(write=False)
        values.update(matrices=M)
        return values

    @property
    def size(self) -> int:
        return int(self.matrices.shape[0])
