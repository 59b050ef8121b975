"""
CLI run configuration and the JSON reports written by each subcommand
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

SCHEMA_VERSION = "1.0"


class RunConfig(BaseModel):
    subcommand: str = Field(..., description="synth, analyze, filter, wiener or decompose")
    inputs: List[Path] = Field(default_factory=list, description="Input CSV files")
    output: Path = Field(..., description="Output file or file prefix")
    n_samples: Optional[int] = Field(None, ge=2, description="Signal length N")
    oversample: float = Field(10.0, ge=1.0, description="Synthesis oversampling M/N")
    seed: int = Field(0, ge=0, description="RNG seed")
    realizations: int = Field(1, ge=1, description="Realization count R")
    mode: Optional[str] = Field(None, description="Decomposition mode (i, ii, iii)")
    snr_db: Optional[float] = Field(None, description="Requested input SNR in dB")

    @field_validator("inputs")
    @classmethod
    def validate_inputs(cls, v: List[Path]) -> List[Path]:
        missing = [str(p) for p in v if not Path(p).is_file()]
        if missing:
            raise ValueError(f"Input file(s) not found: {', '.join(missing)}")
        return v


class Report(BaseModel):
    schema_version: str = SCHEMA_VERSION
    subcommand: str
    config: Dict[str, Any] = Field(default_factory=dict, description="Resolved run configuration")


class SynthReport(Report):
    subcommand: str = "synth"
    n_samples: int
    oversampled_length: int
    realizations: int
    target_power: float
    outputs: List[str]


class AnalyzeReport(Report):
    subcommand: str = "analyze"
    realizations: int
    n_samples: int
    total_power: float
    mean_phi: float
    outputs: List[str]


class FilterReport(Report):
    subcommand: str = "filter"
    kind: str = Field(..., description="unitary or hermitian")
    power_in: float
    power_out: float
    gain_per_bin: List[Optional[float]] = Field(
        default_factory=list, description="Output/input periodogram S0 ratio, null where undefined"
    )
    non_bivariate: bool = False
    outputs: List[str]


class WienerReport(Report):
    subcommand: str = "wiener"
    snr_in_db: Optional[float] = None
    snr_rec_db: Optional[float] = None
    mmse_formula: float
    mmse_empirical: Optional[float] = None
    regularized_bins: int = 0
    outputs: List[str]


class DecomposeReport(Report):
    subcommand: str = "decompose"
    mode: str
    realizations: int
    threshold: float
    fraction_below_threshold: float
    frequencies: List[float]
    statistic: List[Optional[float]]
    outputs: List[str]
