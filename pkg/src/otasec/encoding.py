"""Power control and artificial-noise precoder construction.

Each user transmits ``x_k = eta * gamma_k / h_k + w_k``: channel-inverted
data scaled by a common amplitude factor ``eta``, plus artificial noise
``w = A v`` with ``v`` a shared standard complex Gaussian vector.  The
per-user power constraint ``E|x_k|^2 <= P`` splits the budget between data
(``eta^2 / |h_k|^2``) and noise (``||a_k||^2``, the squared norm of row k of
``A``), which is where every bound in this module comes from.

Precoder families
-----------------
``none``
    No artificial noise (``A = 0``, kept as a K x 1 zero matrix).
``signal_level``
    Independent per-user noise using all residual power: ``A`` diagonal with
    entries ``sqrt(P - eta^2 / |h_k|^2)``.
``data_level``
    Noise added to the data before channel inversion, i.e. ``A`` diagonal
    with entries ``eta * sigma_w / h_k``, at the largest common variance
    ``sigma_w^2`` that keeps every user within power.
``random_zf``
    Random matrix spanning the orthogonal complement of the conjugate server
    channel (so the noise cancels at the server), globally scaled to the
    tightest row budget.
``proposed`` / ``proposed_shared``
    Structured zero-forcing designs optimized by :mod:`otasec.optimizer`.
``mixture``
    Convex combination ``(1 - theta) * A_zf + theta * A_random`` of a fresh
    zero-forced and a fresh unconstrained draw, rescaled to feasibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SystemRealization
from .errors import ContractError, InfeasibleError, ShapeError

PRECODER_KINDS = (
    "none",
    "signal_level",
    "data_level",
    "random_zf",
    "proposed",
    "proposed_shared",
    "mixture",
)

_BUDGET_SLACK = 1e-9  # relative slack when checking eta against its bound


@dataclass
class PowerControl:
    """Amplitude scaling factor with the parameter that produced it."""

    eta: float
    delta: float | None = None
    mu: float | None = None


@dataclass
class NoisePrecoder:
    """A K x noise_dim precoding matrix with its design provenance."""

    A: np.ndarray
    noise_dim: int
    kind: str
    eta: float
    zf_users: tuple[int, ...] | None = None
    lam: np.ndarray | None = None  # per-column noise powers of structured designs
    zf_weights: np.ndarray | None = None
    degenerate: bool = False  # set when a requested design had no power left

    def row_powers(self) -> np.ndarray:
        return np.sum(np.abs(self.A) ** 2, axis=1)


def row_budgets(real: SystemRealization, eta: float) -> np.ndarray:
    """Residual per-user noise power ``P - eta^2 / |h_k|^2`` (clipped at 0)."""
    budgets = real.P - eta**2 / np.abs(real.h) ** 2
    if np.any(budgets < -_BUDGET_SLACK * real.P):
        raise InfeasibleError("eta exceeds the power budget of at least one user")
    return np.maximum(budgets, 0.0)


def eta_upper_bound(real: SystemRealization, A: np.ndarray) -> float:
    """Largest feasible amplitude factor for a given precoder.

    Equals ``sqrt(min_k |h_k|^2 (P - ||a_k||^2))``; raises
    :class:`InfeasibleError` when some row already exceeds the power budget.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != real.num_users:
        raise ShapeError(f"precoder must have {real.num_users} rows, got shape {A.shape}")
    residual = real.P - np.sum(np.abs(A) ** 2, axis=1)
    if np.any(residual < -_BUDGET_SLACK * real.P):
        raise InfeasibleError("a precoder row exceeds the per-user power budget")
    residual = np.maximum(residual, 0.0)
    return math.sqrt(float(np.min(np.abs(real.h) ** 2 * residual)))


def eta_bounds_given_mu(
    real: SystemRealization, A: np.ndarray, mu: float
) -> tuple[float, float]:
    """Feasible eta interval under an accuracy requirement ``D <= mu``.

    Returns ``(lower, upper)`` where the lower bound keeps the server error
    at or below ``mu`` and the upper bound is :func:`eta_upper_bound`.  Both
    are returned even when ``lower > upper`` (empty design space).
    """
    if not (0.0 < mu <= 1.0):
        raise ContractError("mu must lie in (0, 1]")
    upper = eta_upper_bound(real, A)
    hA_sq = float(np.sum(np.abs(real.h @ np.asarray(A)) ** 2))
    lower = math.sqrt((1.0 - mu) * (hA_sq + real.sigma_y_sq) / (mu * real.num_users))
    return lower, upper


def eta_from_delta(real: SystemRealization, delta: float) -> float:
    """Fraction ``delta`` of the no-noise maximum ``sqrt(min_k P |h_k|^2)``."""
    if not (0.0 <= delta <= 1.0):
        raise ContractError("delta must lie in [0, 1]")
    return delta * math.sqrt(float(np.min(real.P * np.abs(real.h) ** 2)))


def _cn_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)


def _scale_to_budgets(A: np.ndarray, budgets: np.ndarray) -> np.ndarray:
    """Largest single scalar multiple keeping every row within its budget."""
    row_sq = np.sum(np.abs(A) ** 2, axis=1)
    active = row_sq > 0.0
    if not active.any():
        return np.zeros_like(A)
    c = math.sqrt(float(np.min(budgets[active] / row_sq[active])))
    return c * A


def _project_out(A: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Project columns onto the orthogonal complement of ``conj(h)``."""
    coeff = h @ A / np.sum(np.abs(h) ** 2)
    return A - np.outer(h.conj(), coeff)


def build_precoder(
    kind: str,
    real: SystemRealization,
    eta: float,
    seed: int = 0,
    params: dict | None = None,
) -> NoisePrecoder:
    """Construct an artificial-noise precoder of the requested family.

    ``seed`` drives the random families; ``params`` carries ``theta`` for
    ``mixture`` and ``N``/``selection`` for ``proposed_shared``.
    """
    if kind not in PRECODER_KINDS:
        raise ContractError(f"unknown precoder kind {kind!r}")
    params = params or {}
    K = real.num_users
    eta_max = eta_from_delta(real, 1.0)
    if eta > eta_max * (1.0 + _BUDGET_SLACK):
        raise InfeasibleError(f"eta={eta:.6g} exceeds the no-noise maximum {eta_max:.6g}")

    if kind == "none":
        return NoisePrecoder(np.zeros((K, 1), dtype=np.complex128), 1, "none", eta)

    if kind == "signal_level":
        budgets = row_budgets(real, eta)
        if not np.any(budgets > 0.0):
            return NoisePrecoder(
                np.zeros((K, 1), dtype=np.complex128), 1, "none", eta, degenerate=True
            )
        A = np.diag(np.sqrt(budgets)).astype(np.complex128)
        return NoisePrecoder(A, K, "signal_level", eta)

    if kind == "data_level":
        # Common pre-scaling noise variance at the largest feasible value:
        # E|x_k|^2 = (eta^2/|h_k|^2)(1 + sigma_w^2) <= P for every user.
        if eta <= 0.0:
            return NoisePrecoder(
                np.zeros((K, 1), dtype=np.complex128), 1, "none", eta, degenerate=True
            )
        sigma_w_sq = float(np.min(real.P * np.abs(real.h) ** 2)) / eta**2 - 1.0
        if sigma_w_sq <= 0.0:
            return NoisePrecoder(
                np.zeros((K, 1), dtype=np.complex128), 1, "none", eta, degenerate=True
            )
        A = np.diag(eta * math.sqrt(sigma_w_sq) / real.h)
        return NoisePrecoder(A, K, "data_level", eta)

    if kind == "random_zf":
        budgets = row_budgets(real, eta)
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        A = _scale_to_budgets(_project_out(_cn_matrix(rng, K, K - 1), real.h), budgets)
        return NoisePrecoder(A, K - 1, "random_zf", eta)

    if kind == "mixture":
        if "theta" not in params:
            raise ContractError("mixture precoder requires params['theta']")
        theta = float(params["theta"])
        if not (0.0 <= theta <= 1.0):
            raise ContractError("theta must lie in [0, 1]")
        budgets = row_budgets(real, eta)
        root = np.random.SeedSequence(seed)
        zf_ss, rand_ss = root.spawn(2)
        A_zf = _scale_to_budgets(
            _project_out(_cn_matrix(np.random.default_rng(zf_ss), K, K - 1), real.h),
            budgets,
        )
        A_rand = _cn_matrix(np.random.default_rng(rand_ss), K, K - 1)
        A = _scale_to_budgets((1.0 - theta) * A_zf + theta * A_rand, budgets)
        return NoisePrecoder(A, K - 1, "mixture", eta)

    from . import optimizer  # deferred: optimizer builds on this module

    if kind == "proposed":
        return optimizer.optimize_proposed(real, eta)
    n_share = int(params.get("N", 2))
    selection = params.get("selection", "exhaustive")
    return optimizer.optimize_shared_zf(real, eta, n_share, selection=selection)


def transmit(
    real: SystemRealization,
    precoder: NoisePrecoder,
    eta: float,
    gamma: np.ndarray,
    v: np.ndarray,
) -> np.ndarray:
    """Encoded transmit vector ``x_k = eta * gamma_k / h_k + (A v)_k``."""
    gamma = np.asarray(gamma, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if gamma.shape != (real.num_users,):
        raise ShapeError(f"gamma must have length {real.num_users}")
    if v.shape != (precoder.noise_dim,):
        raise ShapeError(f"v must have length {precoder.noise_dim}")
    return eta * gamma / real.h + precoder.A @ v


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def precoder_to_dict(precoder: NoisePrecoder) -> dict:
    out = {
        "A": np.stack([precoder.A.real, precoder.A.imag], axis=-1).tolist(),
        "noise_dim": precoder.noise_dim,
        "kind": precoder.kind,
        "eta": precoder.eta,
        "degenerate": precoder.degenerate,
    }
    if precoder.zf_users is not None:
        out["zf_users"] = list(precoder.zf_users)
    if precoder.lam is not None:
        out["lambda"] = np.asarray(precoder.lam, dtype=float).tolist()
    if precoder.zf_weights is not None:
        out["zf_weights"] = np.asarray(precoder.zf_weights, dtype=float).tolist()
    return out
