"""Command-line front end: `run`, `bound-search`, and `verify` subcommands.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 I/O error.

Per-repetition seeds derive from the base seed through a SplitMix64-style
finalizer over (seed + repetition index); the derived seed is recorded in
each session report so any repetition can be replayed on its own.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import adversary, analysis, protocol, verify

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3

_MASK64 = (1 << 64) - 1
_MESSAGE_STREAM_TAG = 0x6D7367  # keeps message bits off the session stream


def derive_seed(base_seed: int, index: int) -> int:
    """Mix (base_seed + index) through the SplitMix64 finalizer."""
    z = (base_seed + index + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & ((1 << 63) - 1)


class ConfigError(ValueError):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghzqss",
        description="Simulate and analyze secret sharing over reusable GHZ carriers")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute protocol sessions")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--message-file", metavar="PATH",
                     help="file of 0/1 characters (whitespace ignored)")
    src.add_argument("--random-bits", metavar="N", type=int,
                     help="draw N message bits from a seeded stream")
    src.add_argument("--bits", metavar="STRING", help="literal bit string")
    run.add_argument("--attack", choices=["none", "intercept", "entangle", "cheat"],
                     default="none")
    run.add_argument("--attack-spec", metavar="PATH",
                     help="JSON attack spec (required for --attack entangle)")
    run.add_argument("--cheat-mode", choices=["flip", "random"], default="random")
    run.add_argument("--noise-p", metavar="P", type=float, default=0.0)
    run.add_argument("--seed", metavar="S", type=int, default=0)
    run.add_argument("--reps", metavar="R", type=int, default=1)
    run.add_argument("--detect-fraction", metavar="F", type=float, default=0.2)
    run.add_argument("--detect-threshold", metavar="T", type=float, default=0.05)
    run.add_argument("--min-samples", metavar="M", type=int, default=50)
    run.add_argument("--out", metavar="PATH")
    run.add_argument("--format", choices=["json", "csv"], default="json")

    bound = sub.add_parser("bound-search",
                           help="search for the minimal average error rate")
    bound.add_argument("--min-distinguishability", metavar="X", type=float, default=1.0)
    bound.add_argument("--budget", metavar="K", type=int, default=10_000)
    bound.add_argument("--ancilla-dim", metavar="D", type=int, default=2)
    bound.add_argument("--seed", metavar="S", type=int, default=0)
    bound.add_argument("--out", metavar="PATH")

    ver = sub.add_parser("verify", help="run the cross-module invariant suite")
    ver.add_argument("--seed", metavar="S", type=int, default=0)
    return parser


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------

def _load_message(args) -> list[int] | None:
    """Fixed message bits, or None when bits are drawn per repetition."""
    if args.random_bits is not None:
        if args.random_bits < 1:
            raise ConfigError("--random-bits must be positive")
        return None
    if args.bits is not None:
        text = args.bits
    else:
        text = Path(args.message_file).read_text(encoding="utf-8")
    bits = [c for c in text if not c.isspace()]
    if not bits or any(c not in "01" for c in bits):
        raise ConfigError("message must be a non-empty string of 0/1 characters")
    return [int(c) for c in bits]


def _build_attack(args) -> adversary.AttackSpec:
    if args.attack_spec is not None:
        attack = adversary.load_attack_json(args.attack_spec)
        return attack
    if args.attack == "none":
        return adversary.NoAttack()
    if args.attack == "intercept":
        return adversary.InterceptResend()
    if args.attack == "cheat":
        return adversary.CheatSpec(who="bob", mode=args.cheat_mode)
    raise ConfigError("--attack entangle requires --attack-spec PATH")


def _aggregate(reports: list[protocol.SessionReport]) -> dict:
    def stats(values: list[float]) -> dict:
        arr = np.asarray(values, dtype=float)
        return {"mean": float(arr.mean()), "stddev": float(arr.std())}

    return {
        "sessions": len(reports),
        "qber_odd": stats([r.qber_odd for r in reports]),
        "qber_even": stats([r.qber_even for r in reports]),
        "qber_total": stats([r.qber_total for r in reports]),
        "qber_data_bits": stats([r.qber_data_bits for r in reports]),
        "detection_rate": float(np.mean([1.0 if r.detected else 0.0 for r in reports])),
    }


def _cmd_run(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be positive")
    if not 0.0 <= args.noise_p <= 0.5:
        raise ConfigError("--noise-p must lie in [0, 0.5]")
    fixed_message = _load_message(args)
    attack = _build_attack(args)
    policy = protocol.DetectionPolicy(sample_fraction=args.detect_fraction,
                                      abort_threshold=args.detect_threshold,
                                      min_samples=args.min_samples)
    if args.format == "csv" and args.reps > 1 and args.out is None:
        raise ConfigError("csv output with --reps > 1 needs --out")

    reports = []
    for rep in range(args.reps):
        rep_seed = derive_seed(args.seed, rep)
        if fixed_message is None:
            stream = np.random.default_rng(derive_seed(rep_seed, _MESSAGE_STREAM_TAG))
            message = [int(b) for b in stream.integers(0, 2, size=args.random_bits)]
        else:
            message = fixed_message
        reports.append(protocol.run_session(
            message, attack, policy, seed=rep_seed, noise_p=args.noise_p))

    if args.format == "json":
        doc = {
            "config": {
                "base_seed": args.seed,
                "repetitions": args.reps,
                "attack": attack.to_dict(),
                "policy": policy.to_dict(),
                "noise_p": args.noise_p,
                "message_source": (
                    {"random_bits": args.random_bits} if fixed_message is None
                    else {"literal_bits": len(fixed_message)}),
            },
            "sessions": [r.to_dict() for r in reports],
            "aggregate": _aggregate(reports),
        }
        payload = json.dumps(doc, indent=2) + "\n"
        if args.out is None:
            sys.stdout.write(payload)
        else:
            Path(args.out).write_text(payload, encoding="utf-8")
    else:
        if args.out is None:
            protocol.write_transcript_csv(reports[0].transcript, sys.stdout)
        else:
            out = Path(args.out)
            for rep, report in enumerate(reports):
                path = out if args.reps == 1 else \
                    out.with_name(f"{out.stem}.rep{rep}{out.suffix}")
                with open(path, "w", encoding="utf-8") as fh:
                    protocol.write_transcript_csv(report.transcript, fh)
            sys.stdout.write(json.dumps(_aggregate(reports), indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bound-search
# ---------------------------------------------------------------------------

def _cmd_bound_search(args) -> int:
    constraint = analysis.SearchConstraint(
        min_distinguishability=args.min_distinguishability)
    try:
        result = analysis.minimize_average_qber(
            constraint, budget=args.budget, seed=args.seed,
            ancilla_dim=args.ancilla_dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = json.dumps(result.to_dict(), indent=2) + "\n"
    row = {
        "distinguishability_constraint": args.min_distinguishability,
        "min_average_qber": result.best_average,
        "epsilon_at_min": result.epsilon,
        "evaluations": result.evaluations,
    }
    if args.out is None:
        sys.stdout.write(payload)
    else:
        out = Path(args.out)
        out.write_text(payload, encoding="utf-8")
        with open(out.with_name(out.name + ".frontier.csv"), "w",
                  encoding="utf-8") as fh:
            analysis.write_frontier_csv([row], fh)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _cmd_verify(args, hadamard_override=None) -> int:
    results = verify.run_checks(seed=args.seed, hadamard_override=hadamard_override)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        sys.stdout.write(f"[{status}] {r.name.ljust(width)}  {r.detail}\n")
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stdout.write(f"failed checks: {', '.join(failed)}\n")
        return EXIT_VERIFY_FAILED
    sys.stdout.write("all checks passed\n")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bound-search":
            return _cmd_bound_search(args)
        return _cmd_verify(args)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except (ValueError, KeyError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
