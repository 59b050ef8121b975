"""
Time-domain bivariate signals and their quaternion spectra
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.exceptions import InvalidInputError


def _frozen_array(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


class BivariateSignal(BaseModel):
    """Uniformly sampled x(t) = x1(t) + i·x2(t)"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    samples: np.ndarray = Field(..., description="(N, 2) real channel pairs (x1, x2)")
    dt: float = Field(1.0, gt=0, description="Sample period in seconds")

    @field_validator("samples", mode="before")
    @classmethod
    def validate_samples(cls, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.size == 0:
            raise InvalidInputError("empty input")
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidInputError(f"Samples must have shape (N, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("Samples must be finite")
        return _frozen_array(arr)

    @classmethod
    def from_channels(cls, x1: np.ndarray, x2: np.ndarray, dt: float = 1.0) -> "BivariateSignal":
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        if x1.shape != x2.shape:
            raise InvalidInputError(f"Channel lengths differ: {x1.shape} vs {x2.shape}")
        return cls(samples=np.stack([x1, x2], axis=-1), dt=dt)

    @property
    def n(self) -> int:
        return int(self.samples.shape[0])

    @property
    def x1(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def x2(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    def power(self) -> float:
        """Average power mean(|x|²)"""
        return float(np.mean(np.sum(self.samples**2, axis=-1)))

    def __add__(self, other: "BivariateSignal") -> "BivariateSignal":
        if other.n != self.n:
            raise InvalidInputError(f"Signal lengths differ: {self.n} vs {other.n}")
        return BivariateSignal(samples=self.samples + other.samples, dt=self.dt)


class QSpectrum(BaseModel):
    """Quaternion-valued spectrum on the natural DFT grid k/(N·dt), k = 0..N-1"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    bins: np.ndarray = Field(..., description="(N, 4) quaternion components per bin")
    dt: float = Field(1.0, gt=0, description="Sample period of the underlying signal")

    @field_validator("bins", mode="before")
    @classmethod
    def validate_bins(cls, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.size == 0:
            raise InvalidInputError("empty input")
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise InvalidInputError(f"Spectrum bins must have shape (N, 4), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("Spectrum bins must be finite")
        return _frozen_array(arr)

    @property
    def n(self) -> int:
        return int(self.bins.shape[0])

    @property
    def half_size(self) -> int:
        return self.n // 2 + 1

    @property
    def df(self) -> float:
        return 1.0 / (self.n * self.dt)

    @property
    def frequencies(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, self.dt)


class InverseTransformResult(BaseModel):
    """Inverse QFT output plus the share of energy left on the j/k components"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    signal: BivariateSignal
    residual_fraction: float = Field(..., ge=0)
    non_bivariate: bool
