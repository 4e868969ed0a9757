"""Command-line front end.

Commands
--------
``run <preset>``
    Execute an experiment preset and write its table.
``metrics <realization.json>``
    Evaluate accuracy/security for a supplied channel realization and a
    chosen precoder, printing the report as JSON.
``optimize <realization.json>``
    Emit the optimized zero-forcing precoder for supplied channels as JSON.
``selftest``
    Cross-validate the closed forms against simulation; nonzero exit on
    failure.

Exit codes: 0 success, 2 configuration/usage error, 3 numeric or contract
error, 4 I/O error.  All randomness is determined by ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .channel import load_realization
from .encoding import build_precoder, eta_from_delta, precoder_to_dict
from .errors import (
    ConfigurationError,
    ContractError,
    InfeasibleError,
    ShapeError,
    SingularMatrixError,
)
from .experiments import PRESET_NAMES, default_preset, run_preset, write_table
from .metrics import evaluate
from .selftest import run_selftest
from .version import __version__

_EXIT_CONFIG = 2
_EXIT_NUMERIC = 3
_EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otasec",
        description="Secure over-the-air computation simulator and noise optimizer.",
    )
    parser.add_argument("--version", action="version", version=f"otasec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment preset")
    p_run.add_argument("preset", help=f"one of: {', '.join(PRESET_NAMES)}")
    p_run.add_argument("--seed", type=int, default=1, help="base seed (default 1)")
    p_run.add_argument("--trials", type=int, default=None, help="override num_realizations")
    p_run.add_argument("--out", default=None, help="output path (default <preset>.dat)")
    p_run.add_argument("--config", default=None, help="JSON file with scenario overrides")
    p_run.add_argument("--threads", type=int, default=None, help="worker threads")
    p_run.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a scenario or preset field (repeatable)",
    )

    for name in ("metrics", "optimize"):
        p = sub.add_parser(name, help=f"{name} on a supplied realization")
        p.add_argument("realization", help="path to a realization JSON document")
        p.add_argument("--eta", type=float, default=None, help="explicit amplitude factor")
        p.add_argument(
            "--delta", type=float, default=1.0, help="fraction of the maximum eta (default 1)"
        )
        p.add_argument("--seed", type=int, default=1)
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        if name == "metrics":
            p.add_argument("--kind", default="none", help="precoder kind (default none)")
            p.add_argument("--theta", type=float, default=0.5, help="mixture weight")
        p.add_argument("--shared-n", type=int, default=None, help="share zero-forcing among N users")
        p.add_argument(
            "--selection",
            default="exhaustive",
            choices=("exhaustive", "best_channel"),
            help="user-selection rule for shared zero-forcing",
        )

    p_self = sub.add_parser("selftest", help="run the oracle-based invariant suite")
    p_self.add_argument("--trials", type=int, default=20)
    p_self.add_argument("--seed", type=int, default=1)
    p_self.add_argument("--samples", type=int, default=10**5)
    return parser


def _parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {pair!r}")
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out


def _coerce_tuples(overrides: dict) -> dict:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}


def _cmd_run(args) -> int:
    overrides = _coerce_tuples(_parse_overrides(args.overrides))
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_overrides = json.load(fh)
        if not isinstance(file_overrides, dict):
            raise ConfigurationError("--config must contain a JSON object")
        overrides = {**file_overrides, **overrides}
    overrides["base_seed"] = args.seed
    if args.trials is not None:
        overrides["num_realizations"] = args.trials
    preset = default_preset(args.preset, **overrides)
    preset.config.validate()
    threads = args.threads
    if threads is None and os.environ.get("OTA_SIM_THREADS"):
        threads = int(os.environ["OTA_SIM_THREADS"])
    table = run_preset(preset, threads=threads)
    out = args.out or f"{args.preset}.dat"
    write_table(table, out)
    print(f"wrote {len(table.rows)} rows to {out}")
    return 0


def _emit(document: dict, out: str) -> None:
    text = json.dumps(document, indent=2)
    if out == "-":
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _resolve_eta(args, real) -> float:
    return args.eta if args.eta is not None else eta_from_delta(real, args.delta)


def _cmd_metrics(args) -> int:
    real = load_realization(args.realization)
    eta = _resolve_eta(args, real)
    params = {"theta": args.theta}
    if args.shared_n is not None:
        params.update(N=args.shared_n, selection=args.selection)
        kind = "proposed_shared"
    else:
        kind = args.kind
    precoder = build_precoder(kind, real, eta, seed=args.seed, params=params)
    report = evaluate(real, precoder.A, eta)
    _emit(
        {
            "kind": precoder.kind,
            "eta": eta,
            "D": report.D,
            "S_coop": report.S_coop,
            "S_noncoop": report.S_noncoop,
            "p_opt": np.stack([report.p_opt.real, report.p_opt.imag], axis=-1).tolist(),
            "per_eav_security": report.per_eav_security.tolist(),
        },
        args.out,
    )
    return 0


def _cmd_optimize(args) -> int:
    real = load_realization(args.realization)
    eta = _resolve_eta(args, real)
    if args.shared_n is not None:
        params = {"N": args.shared_n, "selection": args.selection}
        precoder = build_precoder("proposed_shared", real, eta, seed=args.seed, params=params)
    else:
        precoder = build_precoder("proposed", real, eta, seed=args.seed)
    _emit(precoder_to_dict(precoder), args.out)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints usage itself
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "metrics":
            return _cmd_metrics(args)
        if args.command == "optimize":
            return _cmd_optimize(args)
        return run_selftest(trials=args.trials, seed=args.seed, samples=args.samples)
    except ConfigurationError as exc:
        print(f"error: code={_EXIT_CONFIG} message={exc}", file=sys.stderr)
        if "unknown preset" in str(exc):
            print(parser.format_usage(), end="", file=sys.stderr)
        return _EXIT_CONFIG
    except (ContractError, ShapeError, SingularMatrixError, InfeasibleError, RuntimeError) as exc:
        print(f"error: code={_EXIT_NUMERIC} message={exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except OSError as exc:
        print(f"error: code={_EXIT_IO} message={exc}", file=sys.stderr)
        return _EXIT_IO


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
