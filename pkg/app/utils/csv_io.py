"""
CSV and JSON file I/O for signals, densities, filters and reports

Formats (headers are required):
    signal    t,x1,x2              optional leading ``realization`` column
    density   nu,S0,Phi,s1,s2,s3   (s1, s2, s3) = (j, k, i) components of Phi·mu
    unitary   nu,mu1,mu2,mu3,alpha,phi
    hermitian nu,K,eta,mu1,mu2,mu3  (mu blank allowed where eta = 0)
    poincare  nu,radius,two_theta,two_chi

Errors name the file and the 1-based line of the offending row.
"""

from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from app.config import get_settings
from app.exceptions import InvalidInputError, MalformedFileError
from app.models.densities import EPS_POL, PoincareCoordinates, PolarizationDensity
from app.models.filters import HermitianFilterParams, UnitaryFilterParams
from app.models.signals import BivariateSignal
from app.services.spectral import density_from_normalized_stokes, normalized_stokes

PathLike = Union[str, Path]

SIGNAL_COLUMNS = ["t", "x1", "x2"]
DENSITY_COLUMNS = ["nu", "S0", "Phi", "s1", "s2", "s3"]
UNITARY_COLUMNS = ["nu", "mu1", "mu2", "mu3", "alpha", "phi"]
HERMITIAN_COLUMNS = ["nu", "K", "eta", "mu1", "mu2", "mu3"]
POINCARE_COLUMNS = ["nu", "radius", "two_theta", "two_chi"]

FilterParams = Union[UnitaryFilterParams, HermitianFilterParams]


def _line(row: int) -> int:
    """File line of a data row (header is line 1)"""
    return int(row) + 2


def _read_table(path: PathLike, columns: Sequence[str], optional_nan: Sequence[str] = ()) -> pd.DataFrame:
    path = Path(path)
    return _numeric_columns(_load(path), path, columns, optional_nan)


def _load(path: Path) -> pd.DataFrame:
    try:
        df = pd.read_csv(path, skipinitialspace=True)
    except FileNotFoundError:
        raise InvalidInputError(f"{path}: file not found") from None
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise MalformedFileError(f"{path}: cannot parse CSV ({e})") from None

    df.columns = [str(c).strip() for c in df.columns]
    return df


def _numeric_columns(
    df: pd.DataFrame, path: Path, columns: Sequence[str], optional_nan: Sequence[str] = ()
) -> pd.DataFrame:
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise MalformedFileError(f"{path}:1: missing column(s) {', '.join(missing)}")
    if len(df) == 0:
        raise MalformedFileError(f"{path}: empty input")

    for column in columns:
        values = pd.to_numeric(df[column], errors="coerce")
        bad = values.isna() & df[column].notna()
        if column not in optional_nan:
            bad |= values.isna()
        bad |= np.isinf(values.fillna(0.0))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise MalformedFileError(
                f"{path}:{_line(row)}: column '{column}' has non-numeric value {df[column].iloc[row]!r}"
            )
        df[column] = values.astype(float)
    return df


def _write_table(path: PathLike, df: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=get_settings().float_format)
    return path


def _sample_period(path: Path, t: np.ndarray, offset: int = 0) -> float:
    if t.size < 2:
        return 1.0
    steps = np.diff(t)
    dt = float(steps[0])
    if dt <= 0:
        raise MalformedFileError(f"{path}:{_line(offset + 1)}: time column must increase")
    irregular = np.abs(steps - dt) > 1e-6 * dt
    if np.any(irregular):
        row = offset + int(np.flatnonzero(irregular)[0]) + 1
        raise MalformedFileError(f"{path}:{_line(row)}: non-uniform sampling")
    return dt


# ---------------------------------------------------------------------------
# Signals
# ---------------------------------------------------------------------------


def read_signals(path: PathLike) -> List[BivariateSignal]:
    """All realizations stored in a signal CSV (one when there is no realization column)"""
    path = Path(path)
    df = _read_table(path, SIGNAL_COLUMNS)
    if "realization" not in df.columns:
        groups = [(0, df)]
    else:
        df["realization"] = pd.to_numeric(df["realization"], errors="coerce")
        if df["realization"].isna().any():
            row = int(np.flatnonzero(df["realization"].isna().to_numpy())[0])
            raise MalformedFileError(f"{path}:{_line(row)}: invalid realization index")
        groups = list(df.groupby("realization", sort=True))

    signals = []
    for _, group in groups:
        offset = int(group.index[0])
        dt = _sample_period(path, group["t"].to_numpy(), offset)
        signals.append(BivariateSignal(samples=group[["x1", "x2"]].to_numpy(), dt=dt))
    return signals


def read_signal(path: PathLike) -> BivariateSignal:
    signals = read_signals(path)
    if len(signals) != 1:
        raise MalformedFileError(f"{path}: expected a single realization, found {len(signals)}")
    return signals[0]


def write_signals(path: PathLike, signals: Union[BivariateSignal, Sequence[BivariateSignal]]) -> Path:
    """Write one signal, or several stacked with a realization column"""
    if isinstance(signals, BivariateSignal):
        signals = [signals]
    frames = []
    for index, x in enumerate(signals):
        frame = pd.DataFrame({"t": x.times, "x1": x.x1, "x2": x.x2})
        if len(signals) > 1:
            frame.insert(0, "realization", index)
        frames.append(frame)
    return _write_table(path, pd.concat(frames, ignore_index=True))


# ---------------------------------------------------------------------------
# Densities
# ---------------------------------------------------------------------------


def read_density(path: PathLike, n_samples: Optional[int] = None, dt: Optional[float] = None) -> PolarizationDensity:
    """
    Load a half-grid density.

    Args:
        path: CSV file with columns nu,S0,Phi,s1,s2,s3
        n_samples: grid length N; defaults to 2·(rows - 1)
        dt: sample period; defaults to 1/(N·nu[1])

    Raises:
        MalformedFileError: unparsable file or a row violating 0 <= Phi <= 1, S0 >= 0
    """
    path = Path(path)
    df = _read_table(path, DENSITY_COLUMNS)
    rows = len(df)
    n = int(n_samples) if n_samples is not None else max(1, 2 * (rows - 1))
    if n // 2 + 1 != rows:
        raise MalformedFileError(f"{path}: {rows} rows cannot describe the half-grid of N={n}")
    if dt is None:
        dt = 1.0 / (n * df["nu"].iloc[1]) if rows > 1 and df["nu"].iloc[1] > 0 else 1.0

    S0 = df["S0"].to_numpy()
    Phi = df["Phi"].to_numpy()
    s = df[["s1", "s2", "s3"]].to_numpy()
    for name, bad in (("S0 < 0", S0 < 0), ("Phi outside [0, 1]", (Phi < 0) | (Phi > 1.0 + 1e-9))):
        if np.any(bad):
            row = int(np.flatnonzero(bad)[0])
            raise MalformedFileError(f"{path}:{_line(row)}: {name}")
    missing_axis = (Phi >= EPS_POL) & (np.linalg.norm(s, axis=-1) < 1e-12)
    if np.any(missing_axis):
        row = int(np.flatnonzero(missing_axis)[0])
        raise MalformedFileError(f"{path}:{_line(row)}: Phi > 0 but s1, s2, s3 are all zero")

    try:
        return density_from_normalized_stokes(S0, Phi, s, n_samples=n, dt=dt)
    except (InvalidInputError, ValidationError) as e:
        raise MalformedFileError(f"{path}: {e}") from None


def write_density(path: PathLike, d: PolarizationDensity) -> Path:
    s = normalized_stokes(d)
    df = pd.DataFrame(
        {"nu": d.frequencies, "S0": d.S0, "Phi": d.Phi, "s1": s[:, 0], "s2": s[:, 1], "s3": s[:, 2]}
    )
    return _write_table(path, df)


def write_poincare(path: PathLike, coords: PoincareCoordinates) -> Path:
    df = pd.DataFrame(
        {
            "nu": coords.frequencies,
            "radius": coords.radius,
            "two_theta": coords.two_theta,
            "two_chi": coords.two_chi,
        }
    )
    return _write_table(path, df)


# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------


def read_filter(path: PathLike) -> FilterParams:
    """Unitary or Hermitian parameters, told apart by the header"""
    path = Path(path)
    raw = _load(path)
    columns = set(raw.columns)
    try:
        if {"alpha", "phi"} <= columns:
            df = _numeric_columns(raw, path, UNITARY_COLUMNS)
            return UnitaryFilterParams(
                mu=df[["mu1", "mu2", "mu3"]].to_numpy(),
                alpha=df["alpha"].to_numpy(),
                phi=df["phi"].to_numpy(),
            )
        if {"K", "eta"} <= columns:
            df = _numeric_columns(raw, path, HERMITIAN_COLUMNS, optional_nan=("mu1", "mu2", "mu3"))
            return HermitianFilterParams(
                K=df["K"].to_numpy(), eta=df["eta"].to_numpy(), mu=df[["mu1", "mu2", "mu3"]].to_numpy()
            )
    except MalformedFileError:
        raise
    except (InvalidInputError, ValidationError) as e:
        raise MalformedFileError(f"{path}: {e}") from None
    raise MalformedFileError(f"{path}:1: header matches neither {UNITARY_COLUMNS} nor {HERMITIAN_COLUMNS}")


def write_filter(path: PathLike, p: FilterParams, frequencies: np.ndarray) -> Path:
    if isinstance(p, UnitaryFilterParams):
        df = pd.DataFrame(
            {"nu": frequencies, "mu1": p.mu[:, 0], "mu2": p.mu[:, 1], "mu3": p.mu[:, 2], "alpha": p.alpha, "phi": p.phi}
        )
    else:
        df = pd.DataFrame(
            {"nu": frequencies, "K": p.K, "eta": p.eta, "mu1": p.mu[:, 0], "mu2": p.mu[:, 1], "mu3": p.mu[:, 2]}
        )
    return _write_table(path, df)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def write_report(path: PathLike, report: BaseModel) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path
