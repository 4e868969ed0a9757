import json

import numpy as np
import pytest

from otasec.channel import (
    ScenarioConfig,
    calibrate_noise,
    config_from_dict,
    config_to_dict,
    load_realization,
    realization_from_dict,
    realization_to_dict,
    sample_realization,
    smallscale_factors,
)
from otasec.errors import ConfigurationError


def base_config(**kwargs):
    defaults = dict(num_users=10, num_eavesdroppers=5)
    defaults.update(kwargs)
    return ScenarioConfig(**defaults)


class TestCalibrateNoise:
    def test_reference_snr_zero_db(self):
        cfg = base_config(snr_db=0.0, transmit_power=1.0)
        sy, sz = calibrate_noise(cfg)
        assert sy == pytest.approx(1e-8, rel=1e-12)
        assert sz == sy

    def test_ten_db(self):
        sy, _ = calibrate_noise(base_config(snr_db=10.0))
        assert sy == pytest.approx(1e-9, rel=1e-12)

    def test_monotone_in_snr(self):
        values = [calibrate_noise(base_config(snr_db=s))[0] for s in np.linspace(-20, 40, 13)]
        assert all(a > b for a, b in zip(values, values[1:]))


class TestSampling:
    def test_deterministic_for_seed(self):
        cfg = base_config()
        a = sample_realization(cfg, 42)
        b = sample_realization(cfg, 42)
        assert np.array_equal(a.user_positions, b.user_positions)
        assert np.array_equal(a.eav_positions, b.eav_positions)
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(a.G, b.G)

    def test_different_seeds_differ(self):
        cfg = base_config()
        a = sample_realization(cfg, 7)
        b = sample_realization(cfg, 8)
        assert not np.array_equal(a.user_positions, b.user_positions)

    def test_smallscale_floor_on_legitimate_channels(self):
        cfg = base_config(num_users=4, num_eavesdroppers=1)
        for seed in range(300):
            real = sample_realization(cfg, seed)
            d = np.hypot(real.user_positions[:, 0], real.user_positions[:, 1])
            xi = np.abs(real.h) * d ** (cfg.pathloss_exponent / 2.0)
            assert np.all(xi >= cfg.min_smallscale_magnitude - 1e-12)

    def test_smallscale_floor_hard_bound(self, rng):
        xi = smallscale_factors(rng, 10_000, "complex", min_magnitude=0.1)
        assert np.min(np.abs(xi)) >= 0.1

    def test_fading_variance_at_fixed_distance(self, rng):
        # Coefficient at d = 50 m is d**(-2) * xi; its variance must be 50**-4.
        d = 50.0
        coeff = d**-2.0 * smallscale_factors(rng, 100_000, "complex")
        var = np.mean(np.abs(coeff) ** 2)
        assert var == pytest.approx(d**-4.0, rel=0.03)

    def test_real_mode_has_zero_imaginary_part(self):
        real = sample_realization(base_config(fading_mode="real"), 3)
        assert np.all(real.h.imag == 0.0)
        assert np.all(real.G.imag == 0.0)

    def test_min_separation_holds(self):
        cfg = base_config(num_users=12, num_eavesdroppers=6)
        for seed in range(20):
            real = sample_realization(cfg, seed)
            pts = np.vstack([[0.0, 0.0], real.user_positions, real.eav_positions])
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.hypot(diff[..., 0], diff[..., 1])
            dist[np.diag_indices_from(dist)] = np.inf
            assert dist.min() >= cfg.min_separation
            assert np.hypot(*real.user_positions.T).max() <= cfg.disk_radius

    def test_collocated_shares_position_with_independent_fading(self):
        real = sample_realization(base_config(collocated_eavesdroppers=True), 5)
        assert np.all(real.eav_positions == real.eav_positions[0])
        assert not np.array_equal(real.G[0], real.G[1])

    def test_nested_in_eavesdropper_count(self):
        cfg3 = base_config(num_eavesdroppers=3)
        cfg6 = base_config(num_eavesdroppers=6)
        a = sample_realization(cfg3, 11)
        b = sample_realization(cfg6, 11)
        assert np.array_equal(a.user_positions, b.user_positions)
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(a.eav_positions, b.eav_positions[:3])
        assert np.array_equal(a.G, b.G[:3])

    def test_nesting_holds_in_collocated_mode(self):
        a = sample_realization(base_config(num_eavesdroppers=2, collocated_eavesdroppers=True), 4)
        b = sample_realization(base_config(num_eavesdroppers=5, collocated_eavesdroppers=True), 4)
        assert np.array_equal(a.G, b.G[:2])

    def test_impossible_geometry_raises(self):
        cfg = base_config(
            num_users=8, num_eavesdroppers=1, disk_radius=1.05, min_separation=1.0
        )
        with pytest.raises(ConfigurationError):
            sample_realization(cfg, 0)


class TestValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(num_users=1),
            dict(num_eavesdroppers=0),
            dict(min_separation=0.0),
            dict(min_separation=200.0),
            dict(pathloss_exponent=-1.0),
            dict(fading_mode="rician"),
            dict(min_smallscale_magnitude=1.0),
            dict(snr_db=float("nan")),
            dict(transmit_power=0.0),
        ],
    )
    def test_invalid_configs(self, kwargs):
        with pytest.raises(ConfigurationError):
            base_config(**kwargs).validate()


class TestSerialization:
    def test_config_round_trip_field_names(self):
        cfg = base_config(fading_mode="real", collocated_eavesdroppers=True, snr_db=5.0)
        doc = config_to_dict(cfg)
        assert set(doc) == {
            "num_users",
            "num_eavesdroppers",
            "disk_radius",
            "min_separation",
            "pathloss_exponent",
            "fading_mode",
            "min_smallscale_magnitude",
            "collocated_eavesdroppers",
            "snr_db",
            "transmit_power",
        }
        assert config_from_dict(json.loads(json.dumps(doc))) == cfg

    def test_realization_round_trip(self, tmp_path):
        real = sample_realization(base_config(num_users=3, num_eavesdroppers=2), 9)
        doc = realization_to_dict(real)
        back = realization_from_dict(json.loads(json.dumps(doc)))
        assert np.array_equal(back.h, real.h)
        assert np.array_equal(back.G, real.G)
        assert back.P == real.P and back.sigma_z_sq == real.sigma_z_sq
        path = tmp_path / "real.json"
        path.write_text(json.dumps(doc))
        loaded = load_realization(path)
        assert np.array_equal(loaded.G, real.G)

    def test_malformed_document_raises(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError):
            load_realization(path)
        with pytest.raises(ConfigurationError):
            realization_from_dict({"h": [[1.0, 0.0]]})
