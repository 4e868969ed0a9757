"""Deterministic Monte Carlo experiment presets with tabular output.

Each preset mirrors one study from the evaluation protocol: a sweep over a
system parameter (eavesdropper count, SNR, power-control fraction, ...) whose
metrics are averaged over independent random topologies.  Realization ``r``
of a preset always uses seed ``base_seed + r``, and the same realization
index reuses the same topology across sweep values, so curves are exactly
paired and differences between them have low variance.

Averaged presets expose their per-trial data through :func:`collect_trials`;
:func:`run_preset` reduces those to a mean table.  Tables serialize to a
plain whitespace-separated text format with a ``#``-prefixed metadata block,
designed to be loadable by any generic plotting tool.  Output is byte-for-byte
reproducible for a given preset and seed, independent of the thread count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import (
    ScenarioConfig,
    SystemRealization,
    calibrate_noise,
    config_to_dict,
    sample_realization,
)
from .encoding import build_precoder, eta_bounds_given_mu, eta_from_delta
from .errors import ConfigurationError, ContractError
from .metrics import approximation_error, coop_security, noncoop_security
from .optimizer import optimize_proposed, optimize_shared_zf
from .version import __version__

PRESET_NAMES = (
    "eta_design_space",
    "sweep_L",
    "sweep_snr_designs",
    "security_gap",
    "collocated",
    "shared_zf",
    "power_control",
    "tradeoff",
)

_SNR_GRID = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)

# Kind codes used in the tradeoff scatter table.
TRADEOFF_KINDS = {"proposed": 0, "random": 1, "random_zf": 2, "mixture": 3}


@dataclass
class ExperimentPreset:
    """A named experiment: base scenario, sweep values, and design list."""

    name: str
    config: ScenarioConfig
    num_realizations: int = 100
    sweep_values: tuple = ()
    designs: tuple = ()
    base_seed: int = 1
    delta: float = 1.0  # power-control fraction used by the averaged sweeps
    delta_grid: tuple = (0.4, 0.7, 0.85, 1.0)  # power_control preset
    l_values: tuple = (3, 5, 7)  # shared_zf preset
    shared_n_values: tuple = (1, 2)  # shared_zf preset
    power_levels: tuple = (1.0, 10.0)  # eta_design_space preset
    precoder_kind: str = "none"  # eta_design_space preset
    mixture_pairs: int = 50  # tradeoff preset
    mixture_thetas: int = 11  # tradeoff preset


@dataclass
class ResultTable:
    column_names: list
    rows: np.ndarray
    metadata: dict = field(default_factory=dict)


def default_preset(name: str, **overrides) -> ExperimentPreset:
    """The stock preset for one figure, with optional field overrides."""
    if name not in PRESET_NAMES:
        raise ConfigurationError(
            f"unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}"
        )
    config = ScenarioConfig(num_users=10, num_eavesdroppers=5)
    preset = ExperimentPreset(name=name, config=config)
    if name == "eta_design_space":
        preset.sweep_values = tuple(np.linspace(0.005, 1.0, 200))
        preset.num_realizations = 1
    elif name == "sweep_L":
        preset.sweep_values = tuple(range(1, 16))
    elif name in ("sweep_snr_designs", "security_gap"):
        preset.sweep_values = _SNR_GRID
        preset.designs = ("none", "signal_level", "data_level", "random_zf", "proposed")
    elif name == "collocated":
        preset.sweep_values = _SNR_GRID
    elif name == "shared_zf":
        preset.sweep_values = (0.0, 4.0, 8.0, 12.0, 16.0, 20.0)
    elif name == "power_control":
        preset.sweep_values = _SNR_GRID
    elif name == "tradeoff":
        preset.config = replace(config, num_eavesdroppers=7, snr_db=0.0)
        preset.sweep_values = tuple(np.linspace(0.0, 1.0, 40))
        preset.num_realizations = 1
    config_overrides = {k: v for k, v in overrides.items() if hasattr(config, k)}
    preset_overrides = {k: v for k, v in overrides.items() if not hasattr(config, k)}
    for key in preset_overrides:
        if not hasattr(preset, key):
            raise ConfigurationError(f"unknown preset field {key!r}")
    if config_overrides:
        preset.config = replace(preset.config, **config_overrides)
    return replace(preset, **preset_overrides) if preset_overrides else preset


# ---------------------------------------------------------------------------
# Per-trial metric collection
# ---------------------------------------------------------------------------


def _with_snr(real: SystemRealization, config: ScenarioConfig, snr_db: float):
    sigma, _ = calibrate_noise(replace(config, snr_db=snr_db))
    return replace(real, sigma_y_sq=sigma, sigma_z_sq=sigma)


def _child_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1)[0])


def _zero_precoder(K: int) -> np.ndarray:
    return np.zeros((K, 1), dtype=np.complex128)


def _trial_sweep_L(preset: ExperimentPreset, r: int) -> np.ndarray:
    l_values = [int(v) for v in preset.sweep_values]
    cfg = replace(preset.config, num_eavesdroppers=max(l_values))
    real = sample_realization(cfg, preset.base_seed + r)
    eta = eta_from_delta(real, preset.delta)
    A = _zero_precoder(real.num_users)
    D = approximation_error(real, A, eta)
    out = np.empty((len(l_values), 3))
    for j, L in enumerate(l_values):
        # Realizations are nested in L, so the first L rows are exactly the
        # realization this seed would produce at num_eavesdroppers = L.
        sub = replace(real, eav_positions=real.eav_positions[:L], G=real.G[:L])
        s_coop, _ = coop_security(sub, A, eta)
        s_non, _ = noncoop_security(sub, A, eta)
        out[j] = (D, s_coop, s_non)
    return out


def _columns_sweep_L(preset: ExperimentPreset):
    return ["L", "D", "S_coop", "S_noncoop"]


def _trial_sweep_snr_designs(preset: ExperimentPreset, r: int) -> np.ndarray:
    seed = preset.base_seed + r
    real0 = sample_realization(preset.config, seed)
    eta = eta_from_delta(real0, preset.delta)
    static = {}
    for d_idx, design in enumerate(preset.designs):
        if design not in ("proposed", "proposed_shared"):
            static[design] = build_precoder(
                design, real0, eta, seed=_child_seed(seed, 17, d_idx)
            ).A
    out = np.empty((len(preset.sweep_values), 3 * len(preset.designs)))
    for j, snr in enumerate(preset.sweep_values):
        real = _with_snr(real0, preset.config, snr)
        for d_idx, design in enumerate(preset.designs):
            if design == "proposed":
                A = optimize_proposed(real, eta).A
            elif design == "proposed_shared":
                A = optimize_shared_zf(real, eta, 2).A
            else:
                A = static[design]
            s_coop, _ = coop_security(real, A, eta)
            s_non, _ = noncoop_security(real, A, eta)
            out[j, 3 * d_idx : 3 * d_idx + 3] = (
                approximation_error(real, A, eta),
                s_coop,
                s_non,
            )
    return out


def _columns_sweep_snr_designs(preset: ExperimentPreset):
    cols = ["snr_db"]
    for design in preset.designs:
        cols += [f"D_{design}", f"Scoop_{design}", f"Snoncoop_{design}"]
    return cols


def _trial_collocated(preset: ExperimentPreset, r: int) -> np.ndarray:
    seed = preset.base_seed + r
    real_dist = sample_realization(replace(preset.config, collocated_eavesdroppers=False), seed)
    real_coll = sample_realization(replace(preset.config, collocated_eavesdroppers=True), seed)
    out = np.empty((len(preset.sweep_values), 4))
    for j, snr in enumerate(preset.sweep_values):
        row = []
        for real0 in (real_dist, real_coll):
            real = _with_snr(real0, preset.config, snr)
            eta = eta_from_delta(real, preset.delta)
            A = _zero_precoder(real.num_users)
            s_coop, _ = coop_security(real, A, eta)
            s_non, _ = noncoop_security(real, A, eta)
            row += [s_coop, s_non]
        out[j] = row
    return out


def _columns_collocated(preset: ExperimentPreset):
    return [
        "snr_db",
        "Scoop_distributed",
        "Snoncoop_distributed",
        "Scoop_collocated",
        "Snoncoop_collocated",
    ]


def _trial_shared_zf(preset: ExperimentPreset, r: int) -> np.ndarray:
    seed = preset.base_seed + r
    l_values = [int(v) for v in preset.l_values]
    cfg = replace(preset.config, num_eavesdroppers=max(l_values))
    real_full = sample_realization(cfg, seed)
    eta = eta_from_delta(real_full, preset.delta)
    n_metrics = 1 + len(preset.shared_n_values)
    out = np.empty((len(preset.sweep_values), len(l_values) * n_metrics))
    for j, snr in enumerate(preset.sweep_values):
        col = 0
        for L in l_values:
            sub = replace(real_full, eav_positions=real_full.eav_positions[:L], G=real_full.G[:L])
            real = _with_snr(sub, preset.config, snr)
            values = [coop_security(real, optimize_proposed(real, eta).A, eta)[0]]
            for n_share in preset.shared_n_values:
                prec = optimize_shared_zf(real, eta, int(n_share), selection="exhaustive")
                values.append(coop_security(real, prec.A, eta)[0])
            out[j, col : col + n_metrics] = values
            col += n_metrics
    return out


def _columns_shared_zf(preset: ExperimentPreset):
    cols = ["snr_db"]
    for L in preset.l_values:
        cols.append(f"Scoop_proposed_L{int(L)}")
        for n_share in preset.shared_n_values:
            cols.append(f"Scoop_N{int(n_share)}_L{int(L)}")
    return cols


def _trial_power_control(preset: ExperimentPreset, r: int) -> np.ndarray:
    seed = preset.base_seed + r
    real0 = sample_realization(preset.config, seed)
    out = np.empty((len(preset.sweep_values), 2 * len(preset.delta_grid)))
    for j, snr in enumerate(preset.sweep_values):
        real = _with_snr(real0, preset.config, snr)
        for d_idx, delta in enumerate(preset.delta_grid):
            eta = eta_from_delta(real, float(delta))
            A = optimize_proposed(real, eta).A
            s_coop, _ = coop_security(real, A, eta)
            out[j, 2 * d_idx : 2 * d_idx + 2] = (s_coop, approximation_error(real, A, eta))
    return out


def _columns_power_control(preset: ExperimentPreset):
    cols = ["snr_db"]
    for delta in preset.delta_grid:
        cols += [f"S_{delta:g}", f"D_{delta:g}"]
    return cols


_TRIAL_RUNNERS = {
    "sweep_L": (_columns_sweep_L, _trial_sweep_L),
    "sweep_snr_designs": (_columns_sweep_snr_designs, _trial_sweep_snr_designs),
    "collocated": (_columns_collocated, _trial_collocated),
    "shared_zf": (_columns_shared_zf, _trial_shared_zf),
    "power_control": (_columns_power_control, _trial_power_control),
}


def _map_trials(fn, n: int, threads: int | None):
    if threads is None:
        threads = os.cpu_count() or 1
    if threads <= 1 or n <= 1:
        return [fn(r) for r in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def collect_trials(preset: ExperimentPreset, threads: int | None = None) -> np.ndarray:
    """Per-trial metric arrays, shape (num_realizations, sweep, metrics).

    Only defined for the averaged presets; the sweep column itself is not
    included (it is identical across trials).
    """
    name = "sweep_snr_designs" if preset.name == "security_gap" else preset.name
    if name not in _TRIAL_RUNNERS:
        raise ConfigurationError(f"preset {preset.name!r} has no per-trial form")
    if preset.num_realizations < 1:
        raise ConfigurationError("num_realizations must be at least 1")
    if len(preset.sweep_values) == 0:
        raise ConfigurationError("sweep_values must be non-empty")
    _, trial_fn = _TRIAL_RUNNERS[name]
    results = _map_trials(lambda r: trial_fn(preset, r), preset.num_realizations, threads)
    return np.stack(results, axis=0)


# ---------------------------------------------------------------------------
# Fixed-realization presets
# ---------------------------------------------------------------------------


def _run_eta_design_space(preset: ExperimentPreset) -> tuple[list, np.ndarray]:
    real = sample_realization(preset.config, preset.base_seed)
    A = build_precoder(preset.precoder_kind, real, 0.0, seed=preset.base_seed).A
    cols = ["mu"]
    for p in preset.power_levels:
        cols += [f"eta_lower_P{p:g}", f"eta_upper_P{p:g}"]
    rows = np.empty((len(preset.sweep_values), len(cols)))
    # Noise variances stay at the base calibration while the transmit power
    # moves between levels; recalibrating would just rescale the whole plot.
    for j, mu in enumerate(preset.sweep_values):
        row = [mu]
        for p in preset.power_levels:
            lower, upper = eta_bounds_given_mu(replace(real, P=float(p)), A, float(mu))
            row += [lower, upper]
        rows[j] = row
    return cols, rows


def _run_tradeoff(preset: ExperimentPreset) -> tuple[list, np.ndarray]:
    real = sample_realization(preset.config, preset.base_seed)
    thetas = np.linspace(0.0, 1.0, preset.mixture_thetas)
    rows = []
    for d_idx, delta in enumerate(preset.sweep_values):
        eta = eta_from_delta(real, float(delta))
        A = optimize_proposed(real, eta).A
        s_coop, _ = coop_security(real, A, eta)
        rows.append(
            [TRADEOFF_KINDS["proposed"], delta, 0.0, approximation_error(real, A, eta), s_coop]
        )
        for pair in range(preset.mixture_pairs):
            seed = _child_seed(preset.base_seed, 3, d_idx, pair)
            for theta in thetas:
                prec = build_precoder("mixture", real, eta, seed=seed, params={"theta": float(theta)})
                if theta == 0.0:
                    kind = TRADEOFF_KINDS["random_zf"]
                elif theta == 1.0:
                    kind = TRADEOFF_KINDS["random"]
                else:
                    kind = TRADEOFF_KINDS["mixture"]
                s_coop, _ = coop_security(real, prec.A, eta)
                rows.append(
                    [kind, delta, theta, approximation_error(real, prec.A, eta), s_coop]
                )
    return ["kind", "delta", "theta", "D", "S_coop"], np.array(rows)


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def _metadata(preset: ExperimentPreset) -> dict:
    meta = {
        "preset": preset.name,
        "base_seed": str(preset.base_seed),
        "num_realizations": str(preset.num_realizations),
        "sweep": " ".join(f"{v:g}" for v in preset.sweep_values),
    }
    if preset.designs:
        meta["designs"] = " ".join(preset.designs)
    if preset.name in ("sweep_L", "sweep_snr_designs", "security_gap", "collocated", "shared_zf"):
        meta["delta"] = f"{preset.delta:g}"
    if preset.name == "power_control":
        meta["delta_grid"] = " ".join(f"{d:g}" for d in preset.delta_grid)
    if preset.name == "shared_zf":
        meta["l_values"] = " ".join(str(int(v)) for v in preset.l_values)
    if preset.name == "tradeoff":
        meta["kinds"] = " ".join(f"{k}={v}" for k, v in TRADEOFF_KINDS.items())
        meta["mixture_pairs"] = str(preset.mixture_pairs)
    if preset.name == "eta_design_space":
        meta["precoder_kind"] = preset.precoder_kind
    meta["config"] = json.dumps(config_to_dict(preset.config), separators=(",", ":"))
    meta["build"] = f"otasec {__version__}"
    return meta


def run_preset(preset: ExperimentPreset, threads: int | None = None) -> ResultTable:
    """Execute a preset and return its (averaged) result table."""
    if preset.name not in PRESET_NAMES:
        raise ConfigurationError(f"unknown preset {preset.name!r}")
    if len(preset.sweep_values) == 0:
        raise ConfigurationError("sweep_values must be non-empty")
    sweep = np.asarray(preset.sweep_values, dtype=float)
    if sweep.size > 1 and not (np.all(np.diff(sweep) > 0) or np.all(np.diff(sweep) < 0)):
        raise ConfigurationError("sweep_values must be strictly monotone")

    if preset.name == "eta_design_space":
        cols, rows = _run_eta_design_space(preset)
    elif preset.name == "tradeoff":
        cols, rows = _run_tradeoff(preset)
    else:
        trials = collect_trials(preset, threads)
        means = trials.mean(axis=0)
        if preset.name == "security_gap":
            cols = ["snr_db"] + [f"gap_{d}" for d in preset.designs]
            gaps = np.empty((means.shape[0], len(preset.designs)))
            for d_idx in range(len(preset.designs)):
                gaps[:, d_idx] = means[:, 3 * d_idx + 2] - means[:, 3 * d_idx + 1]
            rows = np.column_stack([sweep, gaps])
        else:
            cols = _TRIAL_RUNNERS[preset.name][0](preset)
            rows = np.column_stack([sweep, means])
    return ResultTable(column_names=cols, rows=np.asarray(rows, dtype=float), metadata=_metadata(preset))


def write_table(table: ResultTable, path) -> None:
    """Write a table as whitespace-separated text with 12 significant digits."""
    rows = np.atleast_2d(np.asarray(table.rows, dtype=float))
    if rows.shape[1] != len(table.column_names):
        raise ContractError("row width does not match column names")
    if not np.isfinite(rows).all():
        raise ContractError("refusing to emit non-finite values")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for key, value in table.metadata.items():
                fh.write(f"# {key}: {value}\n")
            fh.write(" ".join(table.column_names) + "\n")
            for row in rows:
                fh.write(" ".join(f"{v:.12g}" for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write table to {path}: {exc}") from exc


def read_table(path) -> ResultTable:
    """Parse a table previously written by :func:`write_table`."""
    metadata: dict = {}
    columns: list = []
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                metadata[key.strip()] = value.strip()
            elif not columns:
                columns = line.split()
            else:
                rows.append([float(tok) for tok in line.split()])
    return ResultTable(column_names=columns, rows=np.array(rows), metadata=metadata)
