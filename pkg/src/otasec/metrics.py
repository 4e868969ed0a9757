"""Closed-form accuracy and security metrics, with Monte Carlo oracles.

All quantities are normalized mean-squared errors of estimating the sum
``s = sum_k gamma_k`` from the received signal(s), divided by ``Var(s) = K``,
so they live in [0, 1]: 0 means perfect recovery, 1 means the observation is
useless beyond the prior.

* ``approximation_error`` (D): the server estimates ``s`` from
  ``y = eta * s + (h^T A) v + n_y``.  Because everything is jointly Gaussian
  the optimum is linear and ``D = 1 - eta^2 K / (eta^2 K + ||h^T A||^2 +
  sigma_y^2)``.
* ``coop_security`` (S_coop): L eavesdroppers pool their observations
  ``z = eta G D_h^{-1} gamma + G A v + n_z`` and apply the best linear
  combiner ``p_opt = B^{-1} m``, where ``B = Cov(z)`` and ``m = E[z conj(s)]``;
  then ``S = 1 - m^H B^{-1} m / K``.
* ``noncoop_security`` (S_noncoop): the best single eavesdropper, evaluated
  per receiver from the scalar analogue of the same expression.
* ``effective_channel_security``: the cooperative MSE written through the
  combined channel ``g_tilde = p^H G`` of an arbitrary (not necessarily
  optimal) combiner ``p``.

The ``mc_oracle`` estimates D and S_coop from simulated transmissions alone:
it fits linear estimator coefficients from sample second moments on one half
of the draws and reports held-out normalized MSE on the other half, so it
shares no algebra with the closed forms above.  ``statistical_csi_check``
verifies the phase-scrambling argument: when the eavesdropper channel phases
are uniformly random (and unknown), the received signals carry no linear
information about ``s``, i.e. their cross-covariance vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ScenarioConfig, SystemRealization, sample_realization
from .errors import ContractError
from .linalg import hermitian_solve

_CHUNK = 1 << 16


@dataclass
class SecurityReport:
    """Accuracy and security summary for one realization and precoder."""

    D: float
    S_coop: float
    S_noncoop: float
    p_opt: np.ndarray
    per_eav_security: np.ndarray


@dataclass
class OracleReport:
    """Split-sample Monte Carlo estimates of D and S_coop."""

    D_hat: float
    S_hat: float
    num_samples: int
    std_err_D: float
    std_err_S: float


@dataclass
class CrossCovarianceReport:
    """Pooled sample cross-covariance between ``s`` and each eavesdropper signal."""

    crosscov: np.ndarray  # (L,) complex, mean of z_l * conj(s)
    std_err: np.ndarray  # (L,) real, standard error of each entry
    num_draws: int

    @property
    def max_abs_crosscov(self) -> float:
        return float(np.max(np.abs(self.crosscov)))


def approximation_error(real: SystemRealization, A: np.ndarray, eta: float) -> float:
    """Normalized server MSE ``D`` for precoder ``A`` at amplitude ``eta``."""
    if eta < 0.0:
        raise ContractError("eta must be nonnegative")
    K = real.num_users
    signal = eta**2 * K
    denom = signal + float(np.sum(np.abs(real.h @ np.asarray(A)) ** 2)) + real.sigma_y_sq
    if denom == 0.0:
        return 1.0  # no observation at all: the prior mean is optimal
    return 1.0 - signal / denom


def eavesdropper_moments(
    real: SystemRealization, A: np.ndarray, eta: float
) -> tuple[np.ndarray, np.ndarray]:
    """Covariance ``B`` of the pooled eavesdropper signal and mean ``m = E[z conj(s)]``."""
    R = real.G / real.h[np.newaxis, :]  # entries g_{l,k} / h_k
    GA = real.G @ np.asarray(A)
    B = GA @ GA.conj().T + eta**2 * (R @ R.conj().T) + real.sigma_z_sq * np.eye(
        real.num_eavesdroppers
    )
    m = eta * R.sum(axis=1)
    return B, m


def coop_security(
    real: SystemRealization, A: np.ndarray, eta: float
) -> tuple[float, np.ndarray]:
    """Security level against jointly-combining eavesdroppers, with the combiner.

    Returns ``(S, p_opt)`` where ``p_opt = B^{-1} m`` is the MSE-optimal
    linear combining vector and ``S = 1 - m^H B^{-1} m / K``.
    """
    if real.sigma_z_sq <= 0.0:
        raise ContractError("sigma_z_sq must be positive")
    B, m = eavesdropper_moments(real, A, eta)
    p_opt = hermitian_solve(B, m)
    S = 1.0 - float(np.vdot(m, p_opt).real) / real.num_users
    return S, p_opt


def noncoop_security(
    real: SystemRealization, A: np.ndarray, eta: float
) -> tuple[float, np.ndarray]:
    """Security level of the best isolated eavesdropper, plus all per-receiver values."""
    if real.sigma_z_sq <= 0.0:
        raise ContractError("sigma_z_sq must be positive")
    R = real.G / real.h[np.newaxis, :]
    K = real.num_users
    num = (eta**2 / K) * np.abs(R.sum(axis=1)) ** 2
    den = (
        eta**2 * np.sum(np.abs(R) ** 2, axis=1)
        + np.sum(np.abs(real.G @ np.asarray(A)) ** 2, axis=1)
        + real.sigma_z_sq
    )
    per_eav = 1.0 - num / den
    return float(np.min(per_eav)), per_eav


def effective_channel_security(
    real: SystemRealization, A: np.ndarray, eta: float, p: np.ndarray
) -> float:
    """Normalized MSE of the virtual eavesdropper using combiner ``p``.

    Evaluates the single-receiver expression on the effective channel
    ``g_tilde = p^H G`` with noise power ``sigma_z^2 ||p||^2``.  For
    ``p = p_opt`` this reproduces :func:`coop_security`.
    """
    p = np.asarray(p, dtype=np.complex128)
    if p.shape != (real.num_eavesdroppers,):
        raise ContractError(f"p must have length {real.num_eavesdroppers}")
    g_eff = p.conj() @ real.G
    r = g_eff / real.h
    K = real.num_users
    num = (eta**2 / K) * abs(np.sum(r)) ** 2
    den = (
        eta**2 * float(np.sum(np.abs(r) ** 2))
        + float(np.sum(np.abs(g_eff @ np.asarray(A)) ** 2))
        + real.sigma_z_sq * float(np.sum(np.abs(p) ** 2))
    )
    if den == 0.0:
        return 1.0  # p = 0: no observation
    return 1.0 - num / den


def evaluate(real: SystemRealization, A: np.ndarray, eta: float) -> SecurityReport:
    """Full accuracy/security report with values clamped into [0, 1]."""
    D = approximation_error(real, A, eta)
    S_coop, p_opt = coop_security(real, A, eta)
    _, per_eav = noncoop_security(real, A, eta)
    per_eav = np.clip(per_eav, 0.0, 1.0)
    return SecurityReport(
        D=float(min(max(D, 0.0), 1.0)),
        S_coop=float(min(max(S_coop, 0.0), 1.0)),
        S_noncoop=float(np.min(per_eav)),
        p_opt=p_opt,
        per_eav_security=per_eav,
    )


# ---------------------------------------------------------------------------
# Monte Carlo oracles
# ---------------------------------------------------------------------------


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _simulate_chunk(rng, real, A, eta, n):
    """Draw n transmissions through the actual encoding chain."""
    K = real.num_users
    gamma = _cn(rng, (n, K))
    v = _cn(rng, (n, A.shape[1]))
    x = gamma * (eta / real.h)[np.newaxis, :] + v @ A.T
    y = x @ real.h + math.sqrt(real.sigma_y_sq) * _cn(rng, n)
    z = x @ real.G.T + math.sqrt(real.sigma_z_sq) * _cn(rng, (n, real.num_eavesdroppers))
    s = gamma.sum(axis=1)
    return s, y, z


def mc_oracle(
    real: SystemRealization,
    A: np.ndarray,
    eta: float,
    num_samples: int,
    seed: int,
) -> OracleReport:
    """Estimate D and S_coop from simulated transmissions alone.

    The first half of the draws fits the linear estimators from sample second
    moments (a scalar coefficient for the server, an L-vector combiner for
    the pooled eavesdroppers); the second half reports their held-out
    normalized MSE with standard errors from the per-sample variance.
    """
    if num_samples < 10**4:
        raise ContractError("num_samples must be at least 10^4")
    A = np.asarray(A, dtype=np.complex128)
    L = real.num_eavesdroppers
    K = real.num_users
    fit_ss, eval_ss = np.random.SeedSequence(seed).spawn(2)

    n_fit = num_samples // 2
    rng = np.random.default_rng(fit_ss)
    syy = 0.0
    ssy = 0.0 + 0.0j
    szz = np.zeros((L, L), dtype=np.complex128)
    szs = np.zeros(L, dtype=np.complex128)
    left = n_fit
    while left > 0:
        n = min(left, _CHUNK)
        s, y, z = _simulate_chunk(rng, real, A, eta, n)
        syy += float(np.sum(np.abs(y) ** 2))
        ssy += complex(np.sum(s * y.conj()))
        szz += z.T @ z.conj()  # accumulates sum of z z^H outer products
        szs += z.T @ s.conj()
        left -= n
    a_fit = ssy / syy
    # Independent generic solve: the oracle must not share the Cholesky path.
    p_fit = np.linalg.solve(szz / n_fit, szs / n_fit)

    n_eval = num_samples - n_fit
    rng = np.random.default_rng(eval_ss)
    sums = np.zeros(2)
    sums_sq = np.zeros(2)
    left = n_eval
    while left > 0:
        n = min(left, _CHUNK)
        s, y, z = _simulate_chunk(rng, real, A, eta, n)
        err_d = np.abs(a_fit * y - s) ** 2 / K
        err_s = np.abs(z @ p_fit.conj() - s) ** 2 / K
        sums += [err_d.sum(), err_s.sum()]
        sums_sq += [np.sum(err_d**2), np.sum(err_s**2)]
        left -= n
    means = sums / n_eval
    variances = np.maximum(sums_sq / n_eval - means**2, 0.0)
    std_errs = np.sqrt(variances / n_eval)
    return OracleReport(
        D_hat=float(means[0]),
        S_hat=float(means[1]),
        num_samples=num_samples,
        std_err_D=float(std_errs[0]),
        std_err_S=float(std_errs[1]),
    )


def mc_combiner_mse(
    real: SystemRealization,
    A: np.ndarray,
    eta: float,
    p: np.ndarray,
    num_samples: int,
    seed: int,
) -> tuple[float, float]:
    """Simulated normalized MSE of a fixed combiner ``p``, with standard error.

    Unlike the closed-form security value, this is sensitive to the sign and
    phase of ``p``, so it pins down the combiner itself and not only the MSE
    it is claimed to achieve.
    """
    A = np.asarray(A, dtype=np.complex128)
    p = np.asarray(p, dtype=np.complex128)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    total = 0.0
    total_sq = 0.0
    left = num_samples
    while left > 0:
        n = min(left, _CHUNK)
        s, _, z = _simulate_chunk(rng, real, A, eta, n)
        err = np.abs(z @ p.conj() - s) ** 2 / real.num_users
        total += float(err.sum())
        total_sq += float(np.sum(err**2))
        left -= n
    mean = total / num_samples
    var = max(total_sq / num_samples - mean**2, 0.0)
    return mean, math.sqrt(var / num_samples)


def statistical_csi_check(
    config: ScenarioConfig,
    num_realizations: int,
    seed: int,
    eta: float | None = None,
    randomize_phases: bool = True,
) -> CrossCovarianceReport:
    """Sample cross-covariance between ``s`` and ``z`` over a phase ensemble.

    Holds the legitimate channel fixed, redraws the eavesdropper channel
    phases uniformly for every draw (keeping the sampled magnitudes), and
    pools ``z_l * conj(s)``.  With uniform phases the true cross-covariance
    is zero, so the best linear estimator over the ensemble is the prior mean
    and the ensemble security level is 1; the returned standard errors supply
    the matching CLT acceptance threshold.  With ``randomize_phases=False``
    the channel is deterministic and the cross-covariance converges to
    ``eta * sum_k g_{l,k} / h_k`` instead.
    """
    if config.fading_mode != "complex":
        raise ContractError("the phase ensemble requires complex fading")
    real = sample_realization(config, seed)
    if eta is None:
        eta = math.sqrt(float(np.min(real.P * np.abs(real.h) ** 2)))
    L = real.num_eavesdroppers
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(9,)))
    sum_x = np.zeros(L, dtype=np.complex128)
    sum_abs_sq = np.zeros(L)
    left = num_realizations
    while left > 0:
        n = min(left, _CHUNK)
        gamma = _cn(rng, (n, real.num_users))
        w = gamma / real.h[np.newaxis, :]
        if randomize_phases:
            phases = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, (n, L, real.num_users)))
            z = eta * np.einsum("lk,nlk,nk->nl", real.G, phases, w)
        else:
            z = eta * w @ real.G.T
        z += math.sqrt(real.sigma_z_sq) * _cn(rng, (n, L))
        x = z * gamma.sum(axis=1).conj()[:, np.newaxis]
        sum_x += x.sum(axis=0)
        sum_abs_sq += np.sum(np.abs(x) ** 2, axis=0)
        left -= n
    mean = sum_x / num_realizations
    var = np.maximum(sum_abs_sq / num_realizations - np.abs(mean) ** 2, 0.0)
    return CrossCovarianceReport(
        crosscov=mean,
        std_err=np.sqrt(var / num_realizations),
        num_draws=num_realizations,
    )
