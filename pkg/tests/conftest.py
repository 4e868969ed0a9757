import numpy as np
import pytest

from otasec import ScenarioConfig, sample_realization
from otasec.channel import SystemRealization


def make_realization(seed, K=4, L=2, snr_db=10.0, fading_mode="complex", **kwargs):
    config = ScenarioConfig(
        num_users=K, num_eavesdroppers=L, snr_db=snr_db, fading_mode=fading_mode, **kwargs
    )
    return sample_realization(config, seed)


def synthetic_realization(h, G, P=1.0, sigma_y_sq=1.0, sigma_z_sq=1.0):
    """Hand-crafted channels for closed-form corner cases."""
    h = np.asarray(h, dtype=np.complex128)
    G = np.atleast_2d(np.asarray(G, dtype=np.complex128))
    K = h.shape[0]
    L = G.shape[0]
    return SystemRealization(
        user_positions=np.zeros((K, 2)),
        eav_positions=np.zeros((L, 2)),
        h=h,
        G=G,
        P=float(P),
        sigma_y_sq=float(sigma_y_sq),
        sigma_z_sq=float(sigma_z_sq),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
