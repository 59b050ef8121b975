#!/usr/bin/env python3
"""
BivQFT command-line interface

Subcommands wire the library into file-based pipelines:
synth, analyze, filter, wiener and decompose. Every subcommand writes its
CSV outputs plus a JSON report and is deterministic given its seed.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import structlog
from pydantic import ValidationError

from app import __version__
from app.config import get_settings
from app.exceptions import BivQFTError, InvalidInputError, NumericalFailureError
from app.models.filters import UnitaryFilterParams
from app.models.problems import DecompositionMode, DenoisingProblem
from app.models.reports import (
    AnalyzeReport,
    DecomposeReport,
    FilterReport,
    RunConfig,
    SynthReport,
    WienerReport,
)
from app.services.decompose import SignalDecomposer, test_uncorrelated
from app.services.lti_filters import apply_hermitian, apply_unitary
from app.services.qft import qft_forward, qft_inverse
from app.services.spectral import density_from_spectrum, estimate_density, poincare_coordinates
from app.services.synthesis import SpectralSynthesizer
from app.services.wiener import WienerDenoiser, add_noise_at_snr, reconstruction_snr_db
from app.utils import csv_io
from app.utils.logging_config import configure_logging

logger = structlog.get_logger("bivqft.cli")


def _report_path(output: Path, explicit: Optional[str]) -> Path:
    return Path(explicit) if explicit else output.with_suffix(".json")


def _config(args: argparse.Namespace, inputs: Sequence[str], output: Path, **extra) -> RunConfig:
    return RunConfig(
        subcommand=args.command,
        inputs=[Path(p) for p in inputs],
        output=output,
        seed=getattr(args, "seed", 0) or 0,
        n_samples=getattr(args, "n", None),
        **extra,
    )


def _optional_floats(values: np.ndarray) -> List[Optional[float]]:
    return [float(v) if np.isfinite(v) else None for v in values]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    """Synthesize realizations of a target density"""
    output = Path(args.output)
    cfg = _config(
        args, [args.density], output, oversample=args.oversample, realizations=args.realizations
    )
    target = csv_io.read_density(args.density, n_samples=cfg.n_samples)
    synthesizer = SpectralSynthesizer(target, oversample=cfg.oversample, seed=cfg.seed)
    signals = synthesizer.batch(cfg.realizations)

    if args.split and len(signals) > 1:
        outputs = [
            str(csv_io.write_signals(output.with_name(f"{output.stem}_{r:04d}{output.suffix}"), x))
            for r, x in enumerate(signals)
        ]
    else:
        outputs = [str(csv_io.write_signals(output, signals))]

    info = synthesizer.describe()
    report = SynthReport(
        config=cfg.model_dump(mode="json"),
        n_samples=info["n_samples"],
        oversampled_length=info["oversampled_length"],
        realizations=cfg.realizations,
        target_power=info["target_power"],
        outputs=outputs,
    )
    csv_io.write_report(_report_path(output, args.report), report)
    print(f"✅ Synthesized {cfg.realizations} realization(s) of length {info['n_samples']}")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    """Estimate the density of one or more signal files"""
    output = Path(args.output)
    cfg = _config(args, args.signals, output)
    signals = [x for path in args.signals for x in csv_io.read_signals(path)]
    density = estimate_density(signals)

    outputs = [str(csv_io.write_density(output, density))]
    poincare = Path(args.poincare) if args.poincare else output.with_name(f"{output.stem}_poincare.csv")
    outputs.append(str(csv_io.write_poincare(poincare, poincare_coordinates(density))))

    report = AnalyzeReport(
        config=cfg.model_dump(mode="json"),
        realizations=len(signals),
        n_samples=density.n_samples,
        total_power=density.total_power(),
        mean_phi=float(np.mean(density.Phi)),
        outputs=outputs,
    )
    csv_io.write_report(_report_path(output, args.report), report)
    print(f"✅ Analyzed {len(signals)} realization(s), mean Phi = {report.mean_phi:.4f}")
    return 0


def cmd_filter(args: argparse.Namespace) -> int:
    """Apply a unitary or Hermitian filter file to a signal"""
    output = Path(args.output)
    cfg = _config(args, [args.signal, args.filter], output)
    x = csv_io.read_signal(args.signal)
    params = csv_io.read_filter(args.filter)

    X = qft_forward(x)
    if isinstance(params, UnitaryFilterParams):
        kind, Y = "unitary", apply_unitary(X, params)
    else:
        kind, Y = "hermitian", apply_hermitian(X, params)
    result = qft_inverse(Y)
    if result.non_bivariate:
        raise NumericalFailureError(
            f"filtered signal is not bivariate (residual fraction {result.residual_fraction:.3g})"
        )

    half = X.half_size
    s_in = density_from_spectrum(X)[:half, 0]
    s_out = density_from_spectrum(Y)[:half, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s_in > 0, s_out / s_in, np.nan)

    outputs = [str(csv_io.write_signals(output, result.signal))]
    report = FilterReport(
        config=cfg.model_dump(mode="json"),
        kind=kind,
        power_in=x.power(),
        power_out=result.signal.power(),
        gain_per_bin=_optional_floats(ratio),
        non_bivariate=result.non_bivariate,
        outputs=outputs,
    )
    csv_io.write_report(_report_path(output, args.report), report)
    print(f"✅ Applied {kind} filter: power {report.power_in:.6g} -> {report.power_out:.6g}")
    return 0


def cmd_wiener(args: argparse.Namespace) -> int:
    """Wiener-denoise a signal given its density and the noise density"""
    output = Path(args.output)
    inputs = [args.signal, args.signal_density] + [p for p in (args.noise_density, args.clean) if p]
    cfg = _config(args, inputs, output, snr_db=args.add_noise_snr_db)
    if (args.noise_density is None) == (args.add_noise_snr_db is None):
        raise InvalidInputError("Give exactly one of --noise-density or --add-noise-snr-db")

    signal = csv_io.read_signal(args.signal)
    Gxx = csv_io.read_density(args.signal_density, n_samples=signal.n, dt=signal.dt)
    clean = csv_io.read_signal(args.clean) if args.clean else None

    if args.add_noise_snr_db is not None:
        noisy = add_noise_at_snr(
            signal, args.add_noise_snr_db, Phi=args.noise_phi, theta=args.noise_theta, seed=cfg.seed
        )
        y, Gww, clean = noisy.y, noisy.Gww, signal
    else:
        y = signal
        Gww = csv_io.read_density(args.noise_density, n_samples=signal.n, dt=signal.dt)

    denoiser = WienerDenoiser(DenoisingProblem(Gxx=Gxx, Gww=Gww))
    x_hat = denoiser.denoise(y)
    result = denoiser.mmse()

    outputs = [str(csv_io.write_signals(output, x_hat))]
    if args.add_noise_snr_db is not None:
        outputs.append(str(csv_io.write_signals(output.with_name(f"{output.stem}_noisy.csv"), y)))

    report = WienerReport(
        config=cfg.model_dump(mode="json"),
        snr_in_db=reconstruction_snr_db(clean, y) if clean is not None else None,
        snr_rec_db=reconstruction_snr_db(clean, x_hat) if clean is not None else None,
        mmse_formula=result.total,
        mmse_empirical=denoiser.empirical_error(clean, x_hat) if clean is not None else None,
        regularized_bins=result.regularized_bins,
        outputs=outputs,
    )
    csv_io.write_report(_report_path(output, args.report), report)
    if report.snr_rec_db is not None:
        print(f"✅ Denoised: SNR {report.snr_in_db:.2f} dB -> {report.snr_rec_db:.2f} dB")
    else:
        print(f"✅ Denoised: MMSE {report.mmse_formula:.6g}")
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    """Split signals into x_a + x_b and report their cross-correlation"""
    prefix = Path(args.output)
    cfg = _config(args, list(args.signals) + [args.density], prefix, mode=args.mode)
    signals = [x for path in args.signals for x in csv_io.read_signals(path)]
    density = csv_io.read_density(args.density, n_samples=signals[0].n, dt=signals[0].dt)

    decomposer = SignalDecomposer(density, args.mode)
    parts_a, parts_b = decomposer.decompose_batch(signals)
    stat = test_uncorrelated(parts_a, parts_b)

    outputs = [
        str(csv_io.write_signals(prefix.with_name(f"{prefix.stem}_a.csv"), parts_a)),
        str(csv_io.write_signals(prefix.with_name(f"{prefix.stem}_b.csv"), parts_b)),
    ]
    report = DecomposeReport(
        config=cfg.model_dump(mode="json"),
        mode=decomposer.mode.value,
        realizations=stat.realizations,
        threshold=stat.threshold,
        fraction_below_threshold=stat.fraction_below_threshold,
        frequencies=[float(f) for f in stat.frequencies],
        statistic=_optional_floats(stat.statistic),
        outputs=outputs,
    )
    csv_io.write_report(_report_path(prefix.with_suffix(".csv"), args.report), report)
    print(
        f"✅ Decomposed {len(signals)} realization(s) in mode {report.mode}: "
        f"{100 * report.fraction_below_threshold:.1f}% of bins below threshold"
    )
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "synth": cmd_synth,
    "analyze": cmd_analyze,
    "filter": cmd_filter,
    "wiener": cmd_wiener,
    "decompose": cmd_decompose,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="bivqft", description="Quaternion-domain filtering of bivariate signals"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=settings.log_level, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-json", action="store_true", default=settings.log_json, help="JSON log lines")
    sub = parser.add_subparsers(dest="command", required=True)

    def seeded(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=settings.seed, help="RNG seed (env BIVQFT_SEED)")

    p = sub.add_parser("synth", help="Synthesize Gaussian realizations of a density CSV")
    p.add_argument("--density", required=True, help="Target density CSV (nu,S0,Phi,s1,s2,s3)")
    p.add_argument("--output", required=True, help="Signal CSV to write")
    p.add_argument("--n", type=int, default=None, help="Signal length N (default from the density)")
    p.add_argument("--oversample", type=float, default=settings.oversample, help="M/N ratio")
    p.add_argument("--realizations", type=int, default=settings.realizations, help="Realization count R")
    p.add_argument("--split", action="store_true", help="One file per realization instead of a stacked file")
    p.add_argument("--report", default=None, help="JSON report path")
    seeded(p)

    p = sub.add_parser("analyze", help="Estimate density and Poincaré coordinates")
    p.add_argument("signals", nargs="+", help="Signal CSV files (all realizations are averaged)")
    p.add_argument("--output", required=True, help="Density CSV to write")
    p.add_argument("--poincare", default=None, help="Poincaré CSV path")
    p.add_argument("--report", default=None, help="JSON report path")

    p = sub.add_parser("filter", help="Apply a unitary or Hermitian filter CSV")
    p.add_argument("--signal", required=True, help="Input signal CSV")
    p.add_argument("--filter", required=True, help="Filter parameter CSV (half-grid)")
    p.add_argument("--output", required=True, help="Filtered signal CSV")
    p.add_argument("--report", default=None, help="JSON report path")

    p = sub.add_parser("wiener", help="Wiener denoising with known densities")
    p.add_argument("--signal", required=True, help="Observed (or clean, with --add-noise-snr-db) signal CSV")
    p.add_argument("--signal-density", required=True, help="Signal density CSV")
    p.add_argument("--noise-density", default=None, help="Noise density CSV")
    p.add_argument("--add-noise-snr-db", type=float, default=None, help="Add white noise at this input SNR")
    p.add_argument("--noise-phi", type=float, default=0.0, help="Degree of polarization of added noise")
    p.add_argument("--noise-theta", type=float, default=0.0, help="Orientation of added noise (radians)")
    p.add_argument("--clean", default=None, help="Clean reference signal for SNR reporting")
    p.add_argument("--output", required=True, help="Denoised signal CSV")
    p.add_argument("--report", default=None, help="JSON report path")
    seeded(p)

    p = sub.add_parser("decompose", help="Polarizer-pair decomposition x = x_a + x_b")
    p.add_argument("signals", nargs="+", help="Signal CSV files")
    p.add_argument("--density", required=True, help="Density CSV describing the signals")
    p.add_argument("--mode", choices=[m.value for m in DecompositionMode], default="iii")
    p.add_argument("--output", required=True, help="Output prefix (writes <prefix>_a.csv, <prefix>_b.csv)")
    p.add_argument("--report", default=None, help="JSON report path")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, json=args.log_json)
    logger.debug("command_started", command=args.command)
    try:
        code = COMMANDS[args.command](args)
        logger.info("command_completed", command=args.command, exit_code=code)
        return code
    except (ValidationError, InvalidInputError) as e:
        logger.error("invalid_input", command=args.command, error=str(e))
        print(f"❌ {e}", file=sys.stderr)
        return InvalidInputError.exit_code
    except NumericalFailureError as e:
        logger.error("numerical_failure", command=args.command, error=str(e))
        print(f"❌ {e}", file=sys.stderr)
        return NumericalFailureError.exit_code
    except OSError as e:
        logger.error("io_error", command=args.command, error=str(e))
        print(f"❌ {e}", file=sys.stderr)
        return InvalidInputError.exit_code
    except BivQFTError as e:
        logger.error("command_failed", command=args.command, error=str(e))
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
