"""
Tests for the polarizer-pair decompositions x = x_a + x_b
"""

import numpy as np
import pytest

from app.exceptions import GridMismatchError, InvalidInputError
from app.models.densities import PolarizationDensity
from app.models.noise import WhiteNoiseSpec
from app.models.problems import DecompositionMode
from app.models.signals import BivariateSignal
from app.services.decompose import (
    SignalDecomposer,
    branch_filters,
    component_densities,
    decompose_signal,
    decomposition_gain,
    test_uncorrelated as correlation_statistic,
)
from app.services.spectral import estimate_density
from app.services.synthesis import synthesize_batch, white_noise
from tests.conftest import TestData, assert_close, band_mask


def _band_vector(d: PolarizationDensity, mask: np.ndarray) -> np.ndarray:
    """Quaternion density summed over a band"""
    return np.sum(d.to_quaternions()[mask], axis=0)


def _phi(G: np.ndarray) -> float:
    return float(np.linalg.norm(G[1:]) / G[0])


@pytest.mark.unit
@pytest.mark.algorithm
class TestClosedForms:
    """Gains, branch filters and component densities"""

    def setup_method(self):
        """Setup before each test"""
        self.axis = np.array([0.0, 0.6, 0.8])
        self.density = PolarizationDensity.flat(1.0, n_samples=16, Phi=TestData.PHI_STAR, mu=self.axis)

    def test_gains(self):
        """Test the per-mode gain laws"""
        d = PolarizationDensity.flat(1.0, n_samples=8, Phi=0.6, mu=self.axis)

        assert decomposition_gain(d, "i")[0] == pytest.approx(np.sqrt(0.6 / 3.2))
        assert decomposition_gain(d, "ii")[0] == pytest.approx(0.25)
        assert decomposition_gain(d, DecompositionMode.UNCORRELATED)[0] == 0.5
        # both algebraic forms of the mode (ii) gain
        assert decomposition_gain(d, "ii")[0] == pytest.approx(1.0 - 0.6 / (0.6 + 1.0 - np.sqrt(1.0 - 0.36)))
        print("✅ Gain laws")

    def test_gain_limits(self):
        """Test mode (i) vanishes for unpolarized bins and mode (ii) reaches 1/2 for fully polarized bins"""
        unpolarized = PolarizationDensity.flat(1.0, n_samples=8)
        polarized = PolarizationDensity.flat(1.0, n_samples=8, Phi=1.0, mu=self.axis)

        assert np.array_equal(decomposition_gain(unpolarized, "i"), np.zeros(5))
        assert np.array_equal(decomposition_gain(unpolarized, "ii"), np.zeros(5))
        assert np.allclose(decomposition_gain(polarized, "ii"), 0.5)
        assert np.allclose(decomposition_gain(polarized, "i"), 0.5)
        print("✅ Gain limits")

    def test_unknown_mode(self):
        """Test an unknown mode name is rejected"""
        with pytest.raises(InvalidInputError, match="Unknown decomposition mode"):
            decomposition_gain(self.density, "iv")
        print("✅ Unknown mode rejected")

    def test_branch_filters(self):
        """Test x_a = (K, 1, mu) and x_b = (1 - K, K/(1 - K), -mu)"""
        branch_a, branch_b = branch_filters(self.density, "iii")

        assert np.allclose(branch_a.K, 0.5) and np.allclose(branch_a.eta, 1.0)
        assert np.allclose(branch_b.K, 0.5) and np.allclose(branch_b.eta, 1.0)
        assert np.allclose(branch_b.mu, -branch_a.mu)
        print("✅ Branch filters")

    def test_mode_iii_components(self):
        """Test mode (iii) splits into fully polarized parts with opposite axes summing to the input"""
        d_a, d_b = component_densities(self.density, "iii")

        assert np.allclose(d_a.Phi, 1.0) and np.allclose(d_b.Phi, 1.0)
        assert np.allclose(d_a.mu, self.axis) and np.allclose(d_b.mu, -self.axis)
        assert np.allclose(d_a.S0, 0.5 * 1.7) and np.allclose(d_b.S0, 0.5 * 0.3)
        total = d_a.to_quaternions() + d_b.to_quaternions()
        assert_close(total, self.density.to_quaternions(), TestData.ALGEBRA_TOL, "mode iii sum")
        print("✅ Mode (iii) components")

    def test_mode_ii_components(self):
        """Test mode (ii) leaves an unpolarized remainder of power (1 - Phi) S0"""
        d_a, d_b = component_densities(self.density, "ii")

        assert np.allclose(d_b.Phi, 0.0)
        assert np.allclose(d_b.S0, 1.0 - TestData.PHI_STAR)
        assert np.allclose(d_a.Phi, 1.0)
        print("✅ Mode (ii) components")

    def test_mode_i_components(self):
        """Test mode (i): x_a carries S0·Phi and x_b is strongly polarized along -mu"""
        d_a, d_b = component_densities(self.density, "i")

        assert np.allclose(d_a.S0, TestData.PHI_STAR)
        assert np.allclose(d_b.Phi, 0.907, atol=1e-3)
        assert np.allclose(d_b.mu, -self.axis)
        print(f"✅ Mode (i) components: Phi_b = {d_b.Phi[0]:.4f}")

    def test_unpolarized_bins_go_to_b(self, make_signal):
        """Test bins without an axis pass entirely to x_b"""
        d = PolarizationDensity.flat(1.0, n_samples=32)
        x = make_signal(32)
        x_a, x_b = decompose_signal(x, d, "iii")

        assert np.max(np.abs(x_a.samples)) == 0.0
        assert np.array_equal(x_b.samples, x.samples)

        d_a, d_b = component_densities(d, "i")
        assert np.all(d_a.S0 == 0.0) and np.allclose(d_b.S0, 1.0)
        print("✅ Unpolarized bins go to x_b")


@pytest.mark.unit
@pytest.mark.algorithm
class TestSignalDecomposition:
    """Decomposition of signals and the correlation statistic"""

    def test_components_sum_to_signal(self, make_signal, decomposition_target):
        """Test x_a + x_b = x for every mode"""
        x = make_signal(TestData.DECOMP_N)
        for mode in DecompositionMode:
            x_a, x_b = decompose_signal(x, decomposition_target, mode)
            assert_close(x_a.samples + x_b.samples, x.samples, TestData.EXACT_TOL, f"mode {mode.value}")
        print("✅ Components sum to the signal")

    def test_grid_mismatch(self, make_signal, decomposition_target):
        """Test a signal on another grid is rejected"""
        with pytest.raises(GridMismatchError, match="grid mismatch"):
            decompose_signal(make_signal(TestData.DECOMP_N // 2), decomposition_target, "iii")
        print("✅ Grid mismatch detected")

    def test_independent_noise_is_uncorrelated(self):
        """Test the statistic of independent white-noise pairs stays below 3/sqrt(R)"""
        n, R = TestData.SMALL_N, TestData.DECOMP_REALIZATIONS
        spec = WhiteNoiseSpec.unpolarized(1.0)
        a = [white_noise(spec, n, seed=1, index=r) for r in range(R)]
        b = [white_noise(spec, n, seed=2, index=r) for r in range(R)]

        stat = correlation_statistic(a, b)
        assert stat.threshold == pytest.approx(3.0 / np.sqrt(R))
        assert stat.fraction_below_threshold >= 0.95
        print(f"✅ Independent pairs: {100 * stat.fraction_below_threshold:.1f}% below threshold")

    def test_identical_signals_are_correlated(self, make_signal):
        """Test a signal paired with itself has scalar statistic 1"""
        signals = [make_signal(16) for _ in range(10)]
        stat = correlation_statistic(signals, signals)
        assert np.allclose(stat.scalar, 1.0)
        print("✅ Self-correlation is 1")

    def test_statistic_input_checks(self, make_signal):
        """Test unequal and empty realization lists"""
        with pytest.raises(InvalidInputError, match="Realization counts differ"):
            correlation_statistic([make_signal(16)], [])
        with pytest.raises(InvalidInputError, match="At least one"):
            correlation_statistic([], [])
        with pytest.raises(GridMismatchError, match="length"):
            correlation_statistic([make_signal(16), make_signal(8)], [make_signal(16), make_signal(16)])
        print("✅ Statistic input checks")

    def test_silent_component_is_undefined(self, make_signal):
        """Test bins where a component has no power are NaN"""
        silent = BivariateSignal(samples=np.zeros((16, 2)))
        stat = correlation_statistic([silent, silent], [make_signal(16), make_signal(16)])

        assert np.all(np.isnan(stat.statistic))
        assert np.isnan(stat.fraction_below_threshold)
        print("✅ Silent components give undefined statistics")


@pytest.mark.algorithm
@pytest.mark.slow
class TestDecompositionMonteCarlo:
    """Realization-averaged behaviour of the three modes"""

    @pytest.fixture(autouse=True)
    def _realizations(self, decomposition_target):
        self.target = decomposition_target
        self.signals = synthesize_batch(
            decomposition_target, TestData.DECOMP_REALIZATIONS, oversample=1.0, seed=TestData.SEED
        )
        self.band = band_mask(decomposition_target)

    def test_mode_iii_uncorrelated_and_antipodal(self):
        """Test mode (iii) components are uncorrelated with opposite axes"""
        decomposer = SignalDecomposer(self.target, "iii")
        parts_a, parts_b = decomposer.decompose_batch(self.signals)
        stat = correlation_statistic(parts_a, parts_b)

        assert stat.fraction_below_threshold >= 0.95
        G_a = _band_vector(estimate_density(parts_a), self.band)
        G_b = _band_vector(estimate_density(parts_b), self.band)
        alignment = np.dot(G_a[1:], G_b[1:]) / (np.linalg.norm(G_a[1:]) * np.linalg.norm(G_b[1:]))
        assert alignment < -0.98
        print(f"✅ Mode (iii): {100 * stat.fraction_below_threshold:.1f}% below threshold, alignment {alignment:.3f}")

    def test_mode_ii_remainder_unpolarized(self):
        """Test mode (ii) leaves an unpolarized x_b"""
        _, parts_b = SignalDecomposer(self.target, "ii").decompose_batch(self.signals)
        G_b = _band_vector(estimate_density(parts_b), self.band)

        assert _phi(G_b) < 0.05
        print(f"✅ Mode (ii): band Phi_b = {_phi(G_b):.4f}")

    def test_mode_i_matches_closed_form(self):
        """Test mode (i) densities and its residual correlation"""
        decomposer = SignalDecomposer(self.target, "i")
        parts_a, parts_b = decomposer.decompose_batch(self.signals)
        d_a, d_b = decomposer.component_densities()

        G_b = _band_vector(estimate_density(parts_b), self.band)
        assert _phi(G_b) == pytest.approx(_phi(_band_vector(d_b, self.band)), abs=0.03)
        G_a = _band_vector(estimate_density(parts_a), self.band)
        assert G_a[0] == pytest.approx(_band_vector(d_a, self.band)[0], rel=0.05)

        stat = correlation_statistic(parts_a, parts_b)
        assert np.mean(stat.statistic[self.band]) > 0.15
        print(f"✅ Mode (i): Phi_b = {_phi(G_b):.3f}, band statistic {np.mean(stat.statistic[self.band]):.3f}")

    def test_decomposer_description(self):
        """Test the decomposer summary"""
        info = SignalDecomposer(self.target, DecompositionMode.UNPOLARIZED_REMAINDER).describe()
        assert info["mode"] == "ii"
        assert info["n_samples"] == TestData.DECOMP_N
        assert 0.0 <= info["gain_min"] <= info["gain_max"] < 1.0
        print(f"✅ Decomposer description: {info}")
