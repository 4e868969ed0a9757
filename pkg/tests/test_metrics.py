import dataclasses

import numpy as np
import pytest

from otasec.channel import ScenarioConfig
from otasec.encoding import build_precoder, eta_from_delta
from otasec.errors import ContractError
from otasec.metrics import (
    approximation_error,
    coop_security,
    eavesdropper_moments,
    effective_channel_security,
    evaluate,
    mc_combiner_mse,
    mc_oracle,
    noncoop_security,
    statistical_csi_check,
)

from conftest import make_realization, synthetic_realization


def zero_A(K):
    return np.zeros((K, 1), dtype=np.complex128)


def unit(rng, n):
    q = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return q / np.linalg.norm(q)


class TestApproximationError:
    def test_noiseless_perfect_aggregation(self):
        real = synthetic_realization(h=[1.0, 2.0], G=[[1.0, 1.0]], sigma_y_sq=0.0)
        assert approximation_error(real, zero_A(2), 1.0) == 0.0

    def test_signal_equals_noise(self):
        real = synthetic_realization(h=[1.0, 1.0], G=[[1.0, 1.0]], sigma_y_sq=2.0)
        assert approximation_error(real, zero_A(2), 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_degenerate_observation_returns_prior(self):
        real = synthetic_realization(h=[1.0, 1.0], G=[[1.0, 1.0]], sigma_y_sq=0.0)
        assert approximation_error(real, zero_A(2), 0.0) == 1.0

    def test_negative_eta_rejected(self):
        real = make_realization(0)
        with pytest.raises(ContractError):
            approximation_error(real, zero_A(4), -1.0)


class TestCoopSecurity:
    def test_scalar_case(self):
        real = synthetic_realization(h=[1.0], G=[[1.0]], sigma_z_sq=1.0)
        S, p = coop_security(real, zero_A(1), 1.0)
        assert S == pytest.approx(0.5, abs=1e-12)
        assert p[0] == pytest.approx(0.5, abs=1e-12)

    def test_perfect_recovery_when_channels_invertible(self, rng):
        # As many eavesdroppers as users and negligible receiver noise.
        G = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        real = synthetic_realization(h=[1.0, 1.0 + 0.5j], G=G, sigma_z_sq=1e-9)
        S, _ = coop_security(real, zero_A(2), 1.0)
        assert S <= 1e-8

    def test_matches_oracle(self):
        real = make_realization(10, K=4, L=2)
        eta = eta_from_delta(real, 0.7)
        A = build_precoder("signal_level", real, eta).A
        S, _ = coop_security(real, A, eta)
        rep = mc_oracle(real, A, eta, 10**5, seed=77)
        assert abs(S - rep.S_hat) <= 4.0 * rep.std_err_S

    def test_monotone_in_receiver_noise(self):
        real = make_realization(11, K=5, L=3)
        eta = eta_from_delta(real, 0.9)
        values = []
        for scale in np.linspace(1.0, 10.0, 10):
            noisy = dataclasses.replace(real, sigma_z_sq=real.sigma_z_sq * scale)
            values.append(coop_security(noisy, zero_A(5), eta)[0])
        assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_requires_positive_noise(self):
        real = dataclasses.replace(make_realization(1), sigma_z_sq=0.0)
        with pytest.raises(ContractError):
            coop_security(real, zero_A(4), 1e-6)


class TestNoncoopSecurity:
    def test_aligned_single_eavesdropper(self):
        real = synthetic_realization(h=[1.0, 1.0], G=[[1.0, 1.0]], sigma_z_sq=2.0)
        S, per = noncoop_security(real, zero_A(2), 1.0)
        assert S == pytest.approx(0.5, abs=1e-15)
        assert per.shape == (1,)

    def test_cancelling_channel_gives_full_security(self):
        real = synthetic_realization(h=[1.0, 1.0], G=[[1.0, -1.0]], sigma_z_sq=2.0)
        S, _ = noncoop_security(real, zero_A(2), 1.0)
        assert S == 1.0

    def test_single_eavesdropper_equals_cooperative(self):
        for seed in range(25):
            real = make_realization(seed, K=4, L=1)
            eta = eta_from_delta(real, 0.8)
            A = build_precoder("random_zf", real, eta, seed=seed).A
            s_non, _ = noncoop_security(real, A, eta)
            s_coop, _ = coop_security(real, A, eta)
            assert abs(s_non - s_coop) <= 1e-12

    def test_cooperation_never_hurts(self):
        for seed in range(20):
            real = make_realization(seed, K=5, L=3)
            eta = eta_from_delta(real, 0.7)
            A = build_precoder("signal_level", real, eta).A
            s_coop, _ = coop_security(real, A, eta)
            s_non, per = noncoop_security(real, A, eta)
            assert s_coop <= s_non + 1e-10
            assert s_non == np.min(per)

    def test_per_eavesdropper_values_match_scalar_oracle(self, rng):
        # Fit one scalar estimator per eavesdropper from simulated receptions,
        # then score it on held-out draws: an oracle independent of both the
        # per-eavesdropper formula and the joint-combining route.
        real = make_realization(12, K=5, L=3)
        eta = eta_from_delta(real, 0.8)
        A = build_precoder("random_zf", real, eta, seed=3).A
        _, per = noncoop_security(real, A, eta)

        def draw(n):
            gamma = (rng.standard_normal((n, 5)) + 1j * rng.standard_normal((n, 5))) / np.sqrt(2)
            v = (rng.standard_normal((n, 4)) + 1j * rng.standard_normal((n, 4))) / np.sqrt(2)
            x = gamma * (eta / real.h) + v @ A.T
            noise = (rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))) / np.sqrt(2)
            z = x @ real.G.T + np.sqrt(real.sigma_z_sq) * noise
            return gamma.sum(axis=1), z

        n = 200_000
        s, z = draw(n)
        coeff = (s[:, None] * z.conj()).mean(axis=0) / np.mean(np.abs(z) ** 2, axis=0)
        s2, z2 = draw(n)
        err = np.abs(coeff[None, :] * z2 - s2[:, None]) ** 2 / 5
        for ell in range(3):
            se = err[:, ell].std(ddof=1) / np.sqrt(n)
            assert abs(err[:, ell].mean() - per[ell]) <= 4.0 * se


class TestEffectiveChannel:
    def test_identity_at_optimal_combiner(self):
        for seed in range(10):
            real = make_realization(seed, K=4, L=3)
            eta = eta_from_delta(real, 0.6)
            A = build_precoder("random_zf", real, eta, seed=seed).A
            S, p_opt = coop_security(real, A, eta)
            assert abs(effective_channel_security(real, A, eta, p_opt) - S) <= 1e-10

    def test_zero_combiner_sees_nothing(self):
        real = make_realization(2, K=4, L=2)
        assert effective_channel_security(real, zero_A(4), 1e-5, np.zeros(2)) == 1.0

    def test_optimal_combiner_beats_random(self, rng):
        real = make_realization(3, K=4, L=2)
        eta = eta_from_delta(real, 0.8)
        A = build_precoder("signal_level", real, eta).A
        S, _ = coop_security(real, A, eta)
        for _ in range(100):
            p = unit(rng, 2)
            assert effective_channel_security(real, A, eta, p) >= S - 1e-10

    def test_optimal_combiner_is_local_minimum(self, rng):
        real = make_realization(4, K=5, L=3)
        eta = eta_from_delta(real, 0.7)
        A = build_precoder("random_zf", real, eta, seed=1).A
        S, p_opt = coop_security(real, A, eta)
        for _ in range(100):
            p = p_opt + 1e-3 * unit(rng, 3)
            assert effective_channel_security(real, A, eta, p) >= S - 1e-12


class TestZeroForcingNeutrality:
    def test_zero_forced_noise_keeps_server_error(self):
        for seed in range(20):
            real = make_realization(seed, K=5, L=2)
            eta = eta_from_delta(real, 0.6)
            A = build_precoder("random_zf", real, eta, seed=seed).A
            assert abs(
                approximation_error(real, A, eta) - approximation_error(real, zero_A(5), eta)
            ) <= 1e-12


class TestEvaluate:
    def test_report_invariants(self):
        for seed in range(10):
            real = make_realization(seed, K=4, L=3)
            eta = eta_from_delta(real, 0.8)
            A = build_precoder("signal_level", real, eta).A
            rep = evaluate(real, A, eta)
            assert 0.0 <= rep.D <= 1.0
            assert 0.0 <= rep.S_coop <= 1.0
            assert 0.0 <= rep.S_noncoop <= 1.0
            assert rep.S_coop <= rep.S_noncoop + 1e-10
            assert rep.S_noncoop == np.min(rep.per_eav_security)
            assert rep.p_opt.shape == (3,)


class TestMcOracle:
    def test_near_perfect_channel(self):
        real = make_realization(5, K=3, L=1)
        quiet = dataclasses.replace(real, sigma_y_sq=1e-30, sigma_z_sq=1e-12)
        eta = eta_from_delta(quiet, 1.0)
        rep = mc_oracle(quiet, zero_A(3), eta, 10**5, seed=3)
        assert rep.D_hat <= 1e-3

    def test_self_consistency(self):
        real = make_realization(6, K=4, L=2)
        eta = eta_from_delta(real, 0.75)
        A = build_precoder("mixture", real, eta, seed=5, params={"theta": 0.3}).A
        rep = mc_oracle(real, A, eta, 2 * 10**5, seed=8)
        assert abs(approximation_error(real, A, eta) - rep.D_hat) <= 4.0 * rep.std_err_D
        S, _ = coop_security(real, A, eta)
        assert abs(S - rep.S_hat) <= 4.0 * rep.std_err_S

    def test_sample_floor_enforced(self):
        real = make_realization(6)
        with pytest.raises(ContractError):
            mc_oracle(real, zero_A(4), 1e-5, 10**3, seed=1)

    def test_deterministic_in_seed(self):
        real = make_realization(7, K=3, L=2)
        eta = eta_from_delta(real, 0.5)
        a = mc_oracle(real, zero_A(3), eta, 10**4, seed=21)
        b = mc_oracle(real, zero_A(3), eta, 10**4, seed=21)
        assert a == b

    def test_combiner_simulation_detects_sign_flip(self):
        real = make_realization(8, K=4, L=2)
        eta = eta_from_delta(real, 0.8)
        S, p_opt = coop_security(real, zero_A(4), eta)
        good, se = mc_combiner_mse(real, zero_A(4), eta, p_opt, 10**5, seed=4)
        assert abs(good - S) <= 4.0 * se
        bad, se_bad = mc_combiner_mse(real, zero_A(4), eta, -p_opt, 10**5, seed=4)
        assert bad - S > 10.0 * se_bad  # the flipped combiner is visibly worse


class TestStatisticalCsi:
    def test_uniform_phases_have_zero_crosscov(self):
        config = ScenarioConfig(num_users=4, num_eavesdroppers=2)
        rep = statistical_csi_check(config, 20_000, seed=13)
        assert np.all(np.abs(rep.crosscov) <= 4.0 * rep.std_err)
        assert rep.max_abs_crosscov <= 4.0 * np.max(rep.std_err)

    def test_deterministic_channel_recovers_mean_vector(self):
        config = ScenarioConfig(num_users=4, num_eavesdroppers=2)
        rep = statistical_csi_check(config, 50_000, seed=14, randomize_phases=False)
        from otasec.channel import sample_realization

        real = sample_realization(config, 14)
        eta = eta_from_delta(real, 1.0)
        _, m = eavesdropper_moments(real, zero_A(4), eta)
        assert np.all(np.abs(rep.crosscov - m) <= 5.0 * rep.std_err)

    def test_noise_only_signal_is_independent(self):
        config = ScenarioConfig(num_users=4, num_eavesdroppers=2)
        rep = statistical_csi_check(config, 20_000, seed=15, eta=0.0)
        assert np.all(np.abs(rep.crosscov) <= 4.0 * rep.std_err)

    def test_requires_complex_fading(self):
        config = ScenarioConfig(num_users=4, num_eavesdroppers=2, fading_mode="real")
        with pytest.raises(ContractError):
            statistical_csi_check(config, 10_000, seed=1)
