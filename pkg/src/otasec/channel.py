"""Random wireless topologies and channel realizations.

A scenario places a server at the origin of a disk, drops users and
eavesdroppers uniformly at random subject to a minimum mutual separation, and
draws distance-dependent fading for every link: each coefficient is
``d**(-e/2) * xi`` with ``e`` the path-loss exponent and ``xi`` a unit-variance
small-scale factor (circularly-symmetric complex Gaussian, or plain real
Gaussian in ``real`` fading mode).  Legitimate-channel small-scale factors are
redrawn until their magnitude clears a configurable floor, which models
scheduling only users with good enough channels.

Randomness is organized into independent per-entity substreams derived from
one seed: user positions, legitimate fading, and each eavesdropper get their
own stream.  Two consequences the rest of the package relies on:

* a realization is a pure function of ``(config, seed)``;
* realizations are nested in the eavesdropper count: with the same seed, the
  first ``L`` eavesdroppers (positions and channel rows) are identical for
  every ``num_eavesdroppers >= L``, so sweeps over ``L`` are exactly paired.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigurationError

_MAX_PLACEMENT_ATTEMPTS = 10**6
_MAX_FADING_ROUNDS = 10_000

FADING_MODES = ("complex", "real")


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, fading and power parameters of one simulated scenario."""

    num_users: int
    num_eavesdroppers: int
    disk_radius: float = 100.0
    min_separation: float = 1.0
    pathloss_exponent: float = 4.0
    fading_mode: str = "complex"
    min_smallscale_magnitude: float = 0.1
    collocated_eavesdroppers: bool = False
    snr_db: float = 10.0
    transmit_power: float = 1.0

    def validate(self) -> None:
        if self.num_users < 2:
            raise ConfigurationError("num_users must be at least 2")
        if self.num_eavesdroppers < 1:
            raise ConfigurationError("num_eavesdroppers must be at least 1")
        if not (self.disk_radius > self.min_separation > 0.0):
            raise ConfigurationError("require disk_radius > min_separation > 0")
        if self.pathloss_exponent <= 0.0:
            raise ConfigurationError("pathloss_exponent must be positive")
        if self.fading_mode not in FADING_MODES:
            raise ConfigurationError(f"fading_mode must be one of {FADING_MODES}")
        if not (0.0 <= self.min_smallscale_magnitude < 1.0):
            raise ConfigurationError("min_smallscale_magnitude must lie in [0, 1)")
        if not math.isfinite(self.snr_db):
            raise ConfigurationError("snr_db must be finite")
        if not (self.transmit_power > 0.0):
            raise ConfigurationError("transmit_power must be positive")


@dataclass
class SystemRealization:
    """One sampled topology with its channels and power/noise levels."""

    user_positions: np.ndarray  # (K, 2) meters
    eav_positions: np.ndarray  # (L, 2) meters
    h: np.ndarray  # (K,) complex, user-to-server channels
    G: np.ndarray  # (L, K) complex, row l = user-to-eavesdropper-l channels
    P: float  # per-user transmit power budget (watts)
    sigma_y_sq: float  # server noise variance
    sigma_z_sq: float  # eavesdropper noise variance

    @property
    def num_users(self) -> int:
        return self.h.shape[0]

    @property
    def num_eavesdroppers(self) -> int:
        return self.G.shape[0]


def calibrate_noise(config: ScenarioConfig) -> tuple[float, float]:
    """Noise variances that realize ``snr_db`` on a disk-radius-length link.

    The reference link has average channel gain ``disk_radius**(-e)``, so
    ``sigma^2 = P * disk_radius**(-e) / 10**(snr_db / 10)`` makes the average
    received SNR at that distance equal the configured value.  Server and
    eavesdroppers share the same noise level.
    """
    if not math.isfinite(config.snr_db):
        raise ConfigurationError("snr_db must be finite")
    sigma_sq = (
        config.transmit_power
        * config.disk_radius ** (-config.pathloss_exponent)
        / 10.0 ** (config.snr_db / 10.0)
    )
    return sigma_sq, sigma_sq


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _draw_disk_point(rng: np.random.Generator, radius: float) -> np.ndarray:
    r = radius * math.sqrt(rng.uniform())
    ang = rng.uniform(0.0, 2.0 * math.pi)
    return np.array([r * math.cos(ang), r * math.sin(ang)])


def _place_point(
    rng: np.random.Generator,
    radius: float,
    min_sep: float,
    placed: list[np.ndarray],
) -> np.ndarray:
    """Uniform disk point at least ``min_sep`` from the origin and all placed points."""
    for _ in range(_MAX_PLACEMENT_ATTEMPTS):
        p = _draw_disk_point(rng, radius)
        if np.hypot(p[0], p[1]) < min_sep:
            continue
        if all(np.hypot(*(p - q)) >= min_sep for q in placed):
            return p
    raise ConfigurationError(
        "could not place a point after 10^6 attempts; "
        "the disk cannot hold this many points at the requested separation"
    )


def smallscale_factors(
    rng: np.random.Generator,
    n: int,
    fading_mode: str,
    min_magnitude: float = 0.0,
) -> np.ndarray:
    """Unit-variance small-scale fading factors, optionally floor-rejected.

    ``complex`` mode draws circularly-symmetric complex Gaussians, ``real``
    mode plain standard Gaussians (stored with zero imaginary part).  Factors
    with magnitude below ``min_magnitude`` are redrawn.

    Both modes consume the same pair of normals per factor (real mode keeps
    the in-phase component only), so for a fixed stream the two fading modes
    are maximally coupled: comparisons across modes at the same seed are
    common-random-number paired.
    """

    def draw(k: int) -> np.ndarray:
        a = rng.standard_normal(k)
        b = rng.standard_normal(k)
        if fading_mode == "complex":
            return (a + 1j * b) / math.sqrt(2.0)
        return a.astype(np.complex128)

    xi = draw(n)
    if min_magnitude > 0.0:
        for _ in range(_MAX_FADING_ROUNDS):
            bad = np.abs(xi) < min_magnitude
            if not bad.any():
                break
            xi[bad] = draw(int(bad.sum()))
        else:  # pragma: no cover - p(reject) < 8% per round
            raise ConfigurationError("small-scale floor rejection did not converge")
    return xi


def sample_realization(config: ScenarioConfig, seed: int) -> SystemRealization:
    """Draw one topology and channel realization, deterministic in ``seed``."""
    config.validate()
    K = config.num_users
    L = config.num_eavesdroppers
    e = config.pathloss_exponent

    user_rng = _stream(seed, 0)
    placed: list[np.ndarray] = []
    for _ in range(K):
        placed.append(_place_point(user_rng, config.disk_radius, config.min_separation, placed))
    user_positions = np.array(placed)

    h_rng = _stream(seed, 1)
    user_dist = np.hypot(user_positions[:, 0], user_positions[:, 1])
    xi_h = smallscale_factors(h_rng, K, config.fading_mode, config.min_smallscale_magnitude)
    h = user_dist ** (-e / 2.0) * xi_h

    eav_positions = np.zeros((L, 2))
    G = np.zeros((L, K), dtype=np.complex128)
    for ell in range(L):
        eav_rng = _stream(seed, 2, ell)
        if config.collocated_eavesdroppers and ell > 0:
            pos = eav_positions[0]
        else:
            pos = _place_point(eav_rng, config.disk_radius, config.min_separation, placed)
            placed.append(pos)
        eav_positions[ell] = pos
        dist = np.hypot(*(user_positions - pos).T)
        G[ell] = dist ** (-e / 2.0) * smallscale_factors(eav_rng, K, config.fading_mode)

    sigma_y_sq, sigma_z_sq = calibrate_noise(config)
    return SystemRealization(
        user_positions=user_positions,
        eav_positions=eav_positions,
        h=h,
        G=G,
        P=float(config.transmit_power),
        sigma_y_sq=sigma_y_sq,
        sigma_z_sq=sigma_z_sq,
    )


# ---------------------------------------------------------------------------
# JSON serialization (complex scalars travel as [re, im] pairs)
# ---------------------------------------------------------------------------


def _complex_out(a: np.ndarray) -> list:
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _complex_in(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def config_to_dict(config: ScenarioConfig) -> dict:
    return asdict(config)


def config_from_dict(data: dict) -> ScenarioConfig:
    config = ScenarioConfig(**data)
    config.validate()
    return config


def realization_to_dict(real: SystemRealization) -> dict:
    return {
        "user_positions": real.user_positions.tolist(),
        "eav_positions": real.eav_positions.tolist(),
        "h": _complex_out(real.h),
        "G": _complex_out(real.G),
        "P": real.P,
        "sigma_y_sq": real.sigma_y_sq,
        "sigma_z_sq": real.sigma_z_sq,
    }


def realization_from_dict(data: dict) -> SystemRealization:
    try:
        real = SystemRealization(
            user_positions=np.asarray(data["user_positions"], dtype=float),
            eav_positions=np.asarray(data["eav_positions"], dtype=float),
            h=_complex_in(data["h"]),
            G=_complex_in(data["G"]),
            P=float(data["P"]),
            sigma_y_sq=float(data["sigma_y_sq"]),
            sigma_z_sq=float(data["sigma_z_sq"]),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ConfigurationError(f"malformed realization document: {exc}") from exc
    if real.G.ndim != 2 or real.G.shape[1] != real.h.shape[0]:
        raise ConfigurationError("realization h and G shapes disagree")
    if real.sigma_y_sq <= 0.0 or real.sigma_z_sq <= 0.0:
        raise ConfigurationError("noise variances must be positive")
    return real


def load_realization(path) -> SystemRealization:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path} is not valid JSON: {exc}") from exc
    return realization_from_dict(data)
