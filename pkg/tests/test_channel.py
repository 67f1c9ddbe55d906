import numpy as np
import pytest

from flexarray.channel import (PathSet, array_manifold, channel_power,
                               channel_power_expansion, flexible_channel, full_channel,
                               manifold_derivatives, sector_channel_matrix)
from flexarray.geometry import ArrayConfig, FlexModel
from flexarray.harness import generate_scenario
from flexarray.radiation import PatternKind, PatternSpec

OMNI = PatternSpec(PatternKind.OMNI)
COS1 = PatternSpec(PatternKind.COSINE, kappa=1.0)
WAVELENGTH = 0.03


def random_paths(rng, n_paths, phi_span=0.5):
    return PathSet(theta=rng.uniform(np.pi / 3, 2 * np.pi / 3, n_paths),
                   phi=rng.uniform(-phi_span, phi_span, n_paths),
                   beta=rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths))


class TestManifold:
    def test_colocated_elements_have_zero_phase(self):
        positions = np.zeros((5, 3))
        np.testing.assert_allclose(array_manifold(positions, 1.0, 2.0, WAVELENGTH),
                                   np.ones(5))

    def test_half_wavelength_offset_gives_minus_one(self):
        positions = np.array([[WAVELENGTH / 2, 0.0, 0.0]])
        value = array_manifold(positions, np.pi / 2, 0.0, WAVELENGTH)
        np.testing.assert_allclose(value, [-1.0], atol=1e-12)

    def test_zenith_with_flat_array(self):
        positions = np.random.default_rng(0).normal(size=(6, 3))
        positions[:, 2] = 0.0
        np.testing.assert_allclose(array_manifold(positions, 0.0, 1.3, WAVELENGTH),
                                   np.ones(6), atol=1e-12)

    def test_unit_modulus(self):
        rng = np.random.default_rng(3)
        positions = rng.normal(size=(16, 3)) * 0.1
        g = array_manifold(positions, 1.1, -2.0, WAVELENGTH)
        np.testing.assert_allclose(np.abs(g), 1.0, atol=1e-12)


class TestManifoldDerivatives:
    def test_colocated_elements_zero(self):
        d_theta, d_phi = manifold_derivatives(np.zeros((4, 3)), 1.0, 0.5, WAVELENGTH)
        np.testing.assert_array_equal(d_theta, 0.0)
        np.testing.assert_array_equal(d_phi, 0.0)

    def test_matches_central_finite_difference(self):
        rng = np.random.default_rng(5)
        positions = rng.normal(size=(8, 3)) * 0.05
        theta, phi, h = 1.1, -0.7, 1e-6
        d_theta, d_phi = manifold_derivatives(positions, theta, phi, WAVELENGTH)
        fd_theta = (array_manifold(positions, theta + h, phi, WAVELENGTH)
                    - array_manifold(positions, theta - h, phi, WAVELENGTH)) / (2 * h)
        fd_phi = (array_manifold(positions, theta, phi + h, WAVELENGTH)
                  - array_manifold(positions, theta, phi - h, WAVELENGTH)) / (2 * h)
        np.testing.assert_allclose(d_theta, fd_theta, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(d_phi, fd_phi, rtol=1e-6, atol=1e-8)

    def test_z_only_array_at_horizon(self):
        z = np.linspace(-0.03, 0.03, 5)
        positions = np.zeros((5, 3))
        positions[:, 2] = z
        g = array_manifold(positions, np.pi / 2, 0.4, WAVELENGTH)
        d_theta, _ = manifold_derivatives(positions, np.pi / 2, 0.4, WAVELENGTH)
        expected = 1j * (2 * np.pi / WAVELENGTH) * z * g
        np.testing.assert_allclose(d_theta, expected, atol=1e-12)


class TestFlexibleChannel:
    def test_single_path_single_element(self):
        cfg = ArrayConfig(1, 1, wavelength=WAVELENGTH)
        paths = PathSet(theta=[np.pi / 2], phi=[0.0], beta=[1.0])
        h = flexible_channel(FlexModel.PLANAR, cfg, OMNI, paths, 0.0)
        np.testing.assert_allclose(h, [1.0])

    @pytest.mark.parametrize("model", [FlexModel.ROTATABLE, FlexModel.BENDABLE,
                                       FlexModel.FOLDABLE])
    def test_zero_psi_equals_planar_channel(self, model):
        cfg = ArrayConfig(6, 2, wavelength=WAVELENGTH)
        paths = random_paths(np.random.default_rng(9), 3)
        base = flexible_channel(FlexModel.PLANAR, cfg, OMNI, paths, 0.0)
        np.testing.assert_allclose(flexible_channel(model, cfg, OMNI, paths, 0.0), base,
                                   atol=1e-12)

    def test_two_path_superposition(self):
        cfg = ArrayConfig(4, 2, wavelength=WAVELENGTH)
        rng = np.random.default_rng(13)
        paths = random_paths(rng, 2)
        h2 = flexible_channel(FlexModel.ROTATABLE, cfg, COS1, paths, 0.4)
        parts = [flexible_channel(
            FlexModel.ROTATABLE, cfg, COS1,
            PathSet(theta=[paths.theta[l]], phi=[paths.phi[l]], beta=[paths.beta[l]]),
            0.4) for l in range(2)]
        np.testing.assert_allclose(h2, (parts[0] + parts[1]) / np.sqrt(2), rtol=1e-12)

    def test_path_set_validation(self):
        with pytest.raises(ValueError):
            PathSet(theta=[0.1, 0.2], phi=[0.0], beta=[1.0, 1.0])
        with pytest.raises(ValueError):
            PathSet(theta=[4.0], phi=[0.0], beta=[1.0])


class TestChannelPower:
    def test_all_ones_vector(self):
        assert channel_power(np.ones(12)) == pytest.approx(12.0)

    @pytest.mark.parametrize("model", [FlexModel.ROTATABLE, FlexModel.BENDABLE,
                                       FlexModel.FOLDABLE])
    @pytest.mark.parametrize("psi", [-0.5, 0.2, 0.7])
    def test_single_path_omni_power_is_flat(self, model, psi):
        cfg = ArrayConfig(8, 2, wavelength=WAVELENGTH)
        paths = PathSet(theta=[1.2], phi=[0.3], beta=[1.0])
        h = flexible_channel(model, cfg, OMNI, paths, psi)
        assert channel_power(h) == pytest.approx(cfg.n_elements, rel=1e-12)

    def test_rotatable_demo_sweep_peak(self):
        from flexarray.harness import default_sweep_paths

        cfg = ArrayConfig(8, 2, wavelength=0.03)
        paths = default_sweep_paths()
        psis = np.linspace(-np.pi / 2, np.pi / 2, 181)
        base = channel_power(flexible_channel(FlexModel.ROTATABLE, cfg, OMNI, paths, 0.0))
        gains_db = np.array([
            10 * np.log10(channel_power(
                flexible_channel(FlexModel.ROTATABLE, cfg, OMNI, paths, p)) / base)
            for p in psis])
        peak = gains_db.max()
        peak_psi = psis[gains_db.argmax()]
        assert gains_db[90] == pytest.approx(0.0, abs=1e-12)  # psi = 0 entry
        assert 2.0 <= peak <= 3.0
        assert 0.55 <= peak_psi <= 0.85

    @pytest.mark.parametrize("model", [FlexModel.ROTATABLE, FlexModel.BENDABLE,
                                       FlexModel.FOLDABLE])
    @pytest.mark.parametrize("spec", [OMNI, COS1])
    def test_expansion_identity(self, model, spec):
        rng = np.random.default_rng(21)
        cfg = ArrayConfig(5, 2, wavelength=WAVELENGTH)
        for n_paths in (1, 2, 4, 6):
            paths = random_paths(rng, n_paths)
            psi = rng.uniform(-0.6, 0.6)
            direct = channel_power(flexible_channel(model, cfg, spec, paths, psi))
            expanded = channel_power_expansion(model, cfg, spec, paths, psi)
            assert expanded == pytest.approx(direct, rel=1e-10)

    @pytest.mark.parametrize("spec", [OMNI, COS1])
    def test_mount_covariance(self, spec):
        rng = np.random.default_rng(31)
        cfg = ArrayConfig(4, 2, wavelength=WAVELENGTH)
        paths = random_paths(rng, 3)
        alpha = 2 * np.pi / 3
        shifted = PathSet(theta=paths.theta, phi=paths.phi + alpha, beta=paths.beta)
        base = flexible_channel(FlexModel.FOLDABLE, cfg, spec, paths, 0.3, mount=0.0)
        moved = flexible_channel(FlexModel.FOLDABLE, cfg, spec, shifted, 0.3, mount=alpha)
        np.testing.assert_allclose(moved, base, rtol=1e-10, atol=1e-12)


class TestSectorAssembly:
    def make_scenario(self, **kwargs):
        cfg = ArrayConfig(4, 2, wavelength=WAVELENGTH)
        defaults = dict(k_users=2, n_paths=3, snr_db=10.0, seed=42)
        defaults.update(kwargs)
        return generate_scenario(cfg, OMNI, FlexModel.ROTATABLE, **defaults)

    def test_full_channel_shape(self):
        scenario = self.make_scenario(k_users=1)
        stacked = full_channel(scenario, np.zeros(3)).stacked()
        assert stacked.shape == (3 * scenario.cfg.n_elements, 3)

    def test_zero_cross_gains_zero_blocks(self):
        scenario = self.make_scenario()
        for (m, mp, k), paths in scenario.path_sets.items():
            if m != mp:
                scenario.path_sets[(m, mp, k)] = PathSet(
                    theta=paths.theta, phi=paths.phi, beta=np.zeros_like(paths.beta))
        channel = full_channel(scenario, np.array([0.1, -0.2, 0.05]))
        for m in range(3):
            for mp in range(3):
                if m != mp:
                    np.testing.assert_array_equal(channel.blocks[m][mp], 0.0)
                else:
                    assert np.linalg.norm(channel.blocks[m][mp]) > 0

    def test_blocks_match_per_user_channels(self):
        scenario = self.make_scenario()
        psi = np.array([0.2, -0.1, 0.3])
        channel = full_channel(scenario, psi)
        for m in range(3):
            for mp in range(3):
                for k in range(scenario.k_users):
                    expected = flexible_channel(
                        scenario.flex_model, scenario.cfg, scenario.pattern,
                        scenario.path_sets[(m, mp, k)], psi[m])
                    np.testing.assert_allclose(channel.blocks[m][mp][:, k], expected)
        block = sector_channel_matrix(scenario, 1, 2, psi[1])
        np.testing.assert_allclose(channel.blocks[1][2], block)
