import numpy as np
import pytest

from isrsprop import (
    AmplifierSpec,
    AttenuationProfile,
    Band,
    ConfigurationError,
    ConvergenceError,
    FiberSpec,
    LinkSpec,
    NoiseSpectrum,
    PowerSpectrum,
    RamanGainModel,
    TargetSpectrum,
    ase_accumulate,
    ase_from_result,
    ase_injection,
    build_channel_grid,
    osnr_profile,
    propagate_multispan_closedform,
    target_osnr,
)
from isrsprop.profiles import PLANCK

from conftest import constant_alpha_fiber

NF_TABLE1 = {"C": 5.5, "L": 6.0, "U": 5.0}


def osnr_link(fiber, n_spans, receiver_boost=True):
    amp = AmplifierSpec(noise_figure_db=NF_TABLE1)
    return LinkSpec.uniform(fiber, n_spans, amplifier=amp, receiver_boost=receiver_boost)


class TestAseInjection:
    def test_single_stage_value(self):
        # h * 193e12 * 10^0.55 * (10 - 1) * 50e9
        grid = build_channel_grid([Band("C", 192.975, 193.025)], 0.05)
        out = ase_injection(grid, {"C": 5.5}, gain=10.0, reference_bandwidth=0.05)
        expected = PLANCK * 193e12 * 10**0.55 * 9.0 * 50e9
        assert out[0] == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(2.042e-7, rel=1e-3)

    def test_unity_gain_injects_nothing(self, c_grid):
        out = ase_injection(c_grid, {"C": 5.5}, gain=1.0, reference_bandwidth=0.05)
        assert np.all(out == 0.0)

    def test_alternative_formula(self):
        grid = build_channel_grid([Band("C", 192.975, 193.025)], 0.05)
        out = ase_injection(grid, {"C": 5.5}, 10.0, 0.05, formula="gnf-minus-1")
        expected = PLANCK * 193e12 * (10.0 * 10**0.55 - 1.0) * 50e9
        assert out[0] == pytest.approx(expected, rel=1e-12)

    def test_missing_band_rejected(self, cl_grid):
        with pytest.raises(ConfigurationError, match="band 'L'"):
            ase_injection(cl_grid, {"C": 5.5}, 10.0, 0.05)


class TestAseAccumulate:
    def test_unity_gain_stages_accumulate_nothing(self, c_grid):
        fiber = FiberSpec(
            AttenuationProfile.constant(1e-12), RamanGainModel.triangular(slope=0.0), 50.0
        )
        amp = AmplifierSpec(gain_policy="fixed-gain", gain=1.0, noise_figure_db=NF_TABLE1)
        link = LinkSpec.uniform(fiber, 2, amplifier=amp)
        launch = PowerSpectrum.flat_dbm(c_grid, -1.0)
        result = propagate_multispan_closedform(launch, link, 3)
        noise = ase_from_result(result)
        assert np.all(noise.ase_powers == 0.0)

    def test_identity_span_leaves_injection_unreshaped(self, c_grid):
        # lossy first span, transparent second: the single in-line stage's
        # noise arrives at the link end exactly as injected
        lossy = constant_alpha_fiber(0.2, 50.0, peak=0.0)
        transparent = FiberSpec(
            AttenuationProfile.constant(1e-12), RamanGainModel.triangular(slope=0.0), 50.0
        )
        amp = AmplifierSpec(noise_figure_db=NF_TABLE1)
        link = LinkSpec(spans=(lossy, transparent), amplifiers=(amp,))
        launch = PowerSpectrum.flat_dbm(c_grid, -1.0)
        result = propagate_multispan_closedform(launch, link, 3)
        noise = ase_from_result(result)
        injected = ase_injection(c_grid, NF_TABLE1, result.gains[0], c_grid.spacing)
        assert np.allclose(noise.ase_powers, injected, rtol=1e-9)

    def test_noise_rides_the_signal_ratio(self, clu_grid, default_fiber_50):
        link = osnr_link(default_fiber_50, 3, receiver_boost=False)
        launch = PowerSpectrum.flat_dbm(clu_grid, -1.0)
        result = propagate_multispan_closedform(launch, link, 3)
        noise = ase_from_result(result)
        expected = np.zeros(clu_grid.n_channels)
        for k, gain in enumerate(result.gains):
            inj = ase_injection(clu_grid, NF_TABLE1, gain, clu_grid.spacing)
            expected += inj * result.final.powers / result.span_inputs[k + 1].powers
        assert np.allclose(noise.ase_powers, expected, rtol=1e-12)

    def test_default_reference_bandwidth_is_spacing(self, clu_grid, default_fiber_50):
        link = osnr_link(default_fiber_50, 2)
        launch = PowerSpectrum.flat_dbm(clu_grid, -1.0)
        result = propagate_multispan_closedform(launch, link, 3)
        assert ase_from_result(result).reference_bandwidth == clu_grid.spacing

    def test_inconsistent_inputs_rejected(self, clu_grid, default_fiber_50):
        link = osnr_link(default_fiber_50, 3)
        launch = PowerSpectrum.flat_dbm(clu_grid, -1.0)
        result = propagate_multispan_closedform(launch, link, 3)
        with pytest.raises(ConfigurationError, match="inconsistent"):
            ase_accumulate(link, result.gains[:1], result.span_inputs, result.final)


class TestOsnrProfile:
    def test_ratio_definition(self, c_grid):
        signal = PowerSpectrum(c_grid, np.full(c_grid.n_channels, 1e-4))
        noise = NoiseSpectrum(c_grid, np.full(c_grid.n_channels, 1e-8), z=0.0, reference_bandwidth=0.05)
        osnr = osnr_profile(signal, noise)
        assert np.allclose(osnr, 1e4)

    def test_scale_invariance(self, c_grid):
        rng = np.random.default_rng(2)
        s = rng.uniform(1e-5, 1e-3, c_grid.n_channels)
        n = rng.uniform(1e-9, 1e-7, c_grid.n_channels)
        signal = PowerSpectrum(c_grid, s)
        noise = NoiseSpectrum(c_grid, n, z=0.0, reference_bandwidth=0.05)
        doubled = osnr_profile(
            PowerSpectrum(c_grid, 2 * s),
            NoiseSpectrum(c_grid, 2 * n, z=0.0, reference_bandwidth=0.05),
        )
        assert np.allclose(doubled, osnr_profile(signal, noise), rtol=1e-15)

    def test_zero_noise_rejected(self, c_grid):
        signal = PowerSpectrum(c_grid, np.full(c_grid.n_channels, 1e-4))
        noise = NoiseSpectrum(c_grid, np.zeros(c_grid.n_channels), z=0.0, reference_bandwidth=0.05)
        with pytest.raises(ConfigurationError, match="undefined"):
            osnr_profile(signal, noise)


class TestReceiverBoostNeutrality:
    def test_osnr_invariant_to_boost(self, clu_grid, default_fiber_50):
        launch = PowerSpectrum.flat_dbm(clu_grid, -1.0)
        with_boost = propagate_multispan_closedform(launch, osnr_link(default_fiber_50, 3, True), 3)
        without = propagate_multispan_closedform(launch, osnr_link(default_fiber_50, 3, False), 3)
        osnr_a = osnr_profile(with_boost.final, ase_from_result(with_boost))
        osnr_b = osnr_profile(without.final, ase_from_result(without))
        assert np.allclose(osnr_a, osnr_b, rtol=1e-12)


class TestTargetOsnr:
    def test_static_mismatch_cancelled_after_one_update(self, c_grid):
        # transfer-free link: the only OSNR shape distortion is the photon
        # energy factor in the injection, which one update absorbs exactly
        fiber = constant_alpha_fiber(0.2, 50.0, peak=0.0)
        link = osnr_link(fiber, 2)
        target = TargetSpectrum.flat_shape(c_grid)
        run = target_osnr(target, link, total_launch_power=0.064)
        assert run.converged
        assert run.iterations <= 2
        assert run.rmse_history[-1] < 1e-12

    def test_clu_five_span_convergence(self, clu_grid, default_fiber_50):
        target = TargetSpectrum.flat_shape(clu_grid)
        total = PowerSpectrum.flat_dbm(clu_grid, -1.0).total_power
        run = target_osnr(target, osnr_link(default_fiber_50, 5), total)
        assert run.converged
        assert run.iterations <= 20
        assert run.rmse_history[-1] < 1e-5
        # unit-step iteration contracts monotonically on this scenario
        assert all(b < a for a, b in zip(run.rmse_history, run.rmse_history[1:]))

    def test_noise_stays_small_next_to_signal(self, clu_grid, default_fiber_50):
        launch = PowerSpectrum.flat_dbm(clu_grid, -1.0)
        result = propagate_multispan_closedform(launch, osnr_link(default_fiber_50, 5), 3)
        noise = ase_from_result(result)
        assert noise.total_power / result.final.total_power < 1e-2

    def test_nonconvergence_carries_history(self, clu_grid, default_fiber_50):
        target = TargetSpectrum.flat_shape(clu_grid)
        total = PowerSpectrum.flat_dbm(clu_grid, -1.0).total_power
        with pytest.raises(ConvergenceError) as err:
            target_osnr(target, osnr_link(default_fiber_50, 5), total, max_iterations=3)
        assert len(err.value.history) == 3

    def test_noise_free_link_is_rejected(self, c_grid):
        lossless = FiberSpec(
            AttenuationProfile.constant(1e-12), RamanGainModel.triangular(slope=0.0), 50.0
        )
        amp = AmplifierSpec(gain_policy="fixed-gain", gain=1.0, noise_figure_db=NF_TABLE1)
        link = LinkSpec.uniform(lossless, 2, amplifier=amp)
        target = TargetSpectrum.flat_shape(c_grid)
        with pytest.raises(ConfigurationError, match="undefined"):
            target_osnr(target, link, total_launch_power=0.064)

    def test_rmse_in_db_flag(self, c_grid):
        fiber = constant_alpha_fiber(0.2, 50.0, peak=0.0)
        link = osnr_link(fiber, 2)
        target = TargetSpectrum.flat_shape(c_grid)
        run = target_osnr(target, link, 0.064, rmse_in_db=True)
        assert run.converged

    def test_absolute_target_rejected(self, c_grid, default_fiber_50):
        target = TargetSpectrum.absolute_dbm(c_grid, np.full(c_grid.n_channels, 20.0))
        with pytest.raises(ConfigurationError, match="shape-only"):
            target_osnr(target, osnr_link(default_fiber_50, 2), 0.064)
