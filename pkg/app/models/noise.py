"""
White-noise descriptions and synthesis targets
"""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.exceptions import InvalidInputError
from app.models.densities import PolarizationDensity

# A synthesis target is any valid half-grid density
SynthesisTarget = PolarizationDensity


class WhiteNoiseSpec(BaseModel):
    """
    Bivariate Gaussian white noise, given either by its channels
    (sigma_u, sigma_v, rho_uv) or by its polarization (S0w, Phi, theta).

    Exactly one of the two forms must be filled in.
    """

    model_config = ConfigDict(frozen=True)

    sigma_u: Optional[float] = Field(None, ge=0, description="Std dev of the first channel")
    sigma_v: Optional[float] = Field(None, ge=0, description="Std dev of the second channel")
    rho_uv: Optional[float] = Field(None, ge=-1, le=1, description="Channel correlation")

    S0w: Optional[float] = Field(None, gt=0, description="Total noise density")
    Phi: Optional[float] = Field(None, ge=0, le=1, description="Degree of polarization")
    theta: Optional[float] = Field(
        None, ge=-np.pi / 2, le=np.pi / 2, description="Linear polarization orientation (radians)"
    )

    @model_validator(mode="after")
    def validate_form(self) -> "WhiteNoiseSpec":
        channel = [self.sigma_u, self.sigma_v, self.rho_uv]
        polarized = [self.S0w, self.Phi, self.theta]
        channel_set = any(v is not None for v in channel)
        polarized_set = any(v is not None for v in polarized)
        if channel_set == polarized_set:
            raise InvalidInputError(
                "White noise needs either (sigma_u, sigma_v, rho_uv) or (S0w, Phi, theta)"
            )
        if channel_set and any(v is None for v in channel):
            raise InvalidInputError("Channel form requires sigma_u, sigma_v and rho_uv")
        if polarized_set and any(v is None for v in polarized):
            raise InvalidInputError("Polarized form requires S0w, Phi and theta")
        return self

    @classmethod
    def channel(cls, sigma_u: float, sigma_v: float, rho_uv: float = 0.0) -> "WhiteNoiseSpec":
        return cls(sigma_u=sigma_u, sigma_v=sigma_v, rho_uv=rho_uv)

    @classmethod
    def polarized(cls, S0w: float, Phi: float, theta: float = 0.0) -> "WhiteNoiseSpec":
        return cls(S0w=S0w, Phi=Phi, theta=theta)

    @classmethod
    def unpolarized(cls, S0w: float = 1.0) -> "WhiteNoiseSpec":
        """Proper noise with total variance S0w split evenly over the channels"""
        sigma = float(np.sqrt(S0w / 2.0))
        return cls.channel(sigma, sigma, 0.0)

    @property
    def is_channel_form(self) -> bool:
        return self.sigma_u is not None
