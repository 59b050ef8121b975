"""
Problem descriptions for denoising and decomposition
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator

from app.exceptions import GridMismatchError
from app.models.densities import PolarizationDensity, sanitize_density


class DenoisingProblem(BaseModel):
    """Observation y = x + w with known signal and noise densities"""

    model_config = ConfigDict(frozen=True)

    Gxx: PolarizationDensity
    Gww: PolarizationDensity

    @model_validator(mode="after")
    def validate_grids(self) -> "DenoisingProblem":
        if not self.Gxx.same_grid(self.Gww):
            raise GridMismatchError(
                f"grid mismatch: signal density (N={self.Gxx.n_samples}, dt={self.Gxx.dt}) "
                f"vs noise density (N={self.Gww.n_samples}, dt={self.Gww.dt})"
            )
        return self

    @property
    def n_samples(self) -> int:
        return self.Gxx.n_samples

    @property
    def Gyy(self) -> PolarizationDensity:
        """Gxx + Gww as quaternion densities"""
        G = self.Gxx.to_quaternions() + self.Gww.to_quaternions()
        G = sanitize_density(G, scale=G[:, 0])
        return PolarizationDensity.from_quaternions(G, n_samples=self.Gxx.n_samples, dt=self.Gxx.dt)


class DecompositionMode(str, Enum):
    """Gain law of the polarizer pair x = x_a + x_b"""

    POLARIZED_PART_POWER = "i"
    UNPOLARIZED_REMAINDER = "ii"
    UNCORRELATED = "iii"

    @property
    def description(self) -> str:
        return {
            "i": "x_a carries the power of the polarized part",
            "ii": "x_b is unpolarized (depolarizer output)",
            "iii": "x_a and x_b are uncorrelated with orthogonal axes",
        }[self.value]
