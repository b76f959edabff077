"""Command-line front end.

Subcommands:

* ``attack``   — run the priority-guided attack on a PNG, write the
  adversarial PNG and a JSON report;
* ``baseline`` — same I/O contract, but accumulating uniformly random units;
* ``metrics``  — compare two PNGs and print the perceptual/Lp metrics.

Exit codes: 0 success, 1 attack failure, 2 usage error, 3 I/O error,
4 oracle error. Reports conform to ``schemas/attack_report.schema.json``.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from . import metrics as metrics_mod
from .attack import AttackConfig, AttackGoal, random_baseline_attack
from .attack import attack as run_attack
from .evolution import DeConfig, FitnessError
from .images import ImageFormatError, load_png, save_png
from .metrics import ChannelWeights, DEFAULT_CHANNEL_WEIGHTS
from .oracle import OracleError, RemoteOracle, ToyClassifier

EXIT_OK = 0
EXIT_ATTACK_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_ORACLE = 4

ENDPOINT_ENV_VAR = "GREEDYFOOL_ENDPOINT"


def _parse_weights(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected 'r,g,b', got {text!r}")
    try:
        r, g, b = (float(p) for p in parts)
        return ChannelWeights(r, g, b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_common_attack_args(parser):
    parser.add_argument("input", help="benign 8-bit RGB PNG")
    parser.add_argument("--oracle", choices=["builtin", "remote"], default="builtin")
    parser.add_argument("--seed", type=int, default=0, help="attack RNG seed")
    parser.add_argument(
        "--endpoint",
        default=None,
        help=f"remote oracle URL (falls back to ${ENDPOINT_ENV_VAR})",
    )
    parser.add_argument("--mode", choices=["nontargeted", "targeted"], default="nontargeted")
    parser.add_argument("--target-label", type=int, default=None)
    parser.add_argument(
        "--true-label",
        type=int,
        default=None,
        help="defaults to the oracle's prediction on the input",
    )
    parser.add_argument("--max-units", type=int, default=None)
    parser.add_argument("--out", default=None, help="adversarial PNG path")
    parser.add_argument("--report", default=None, help="JSON report path")
    parser.add_argument("--sd-floor", type=float, default=1.0)
    parser.add_argument(
        "--weights",
        type=_parse_weights,
        default=DEFAULT_CHANNEL_WEIGHTS,
        metavar="R,G,B",
        help="channel weights summing to 1 (default 0.299,0.587,0.114)",
    )
    parser.add_argument("--num-classes", type=int, default=10, help="builtin oracle classes")
    parser.add_argument("--oracle-seed", type=int, default=0, help="builtin oracle weights seed")
    parser.add_argument("--bearer-token", default=None, help="remote oracle auth token")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="greedyfool",
        description="Black-box per-pixel adversarial attacks scored by perceptual cost.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_attack = sub.add_parser("attack", help="run the priority-guided attack")
    _add_common_attack_args(p_attack)
    p_attack.add_argument("--pop-size", type=int, default=200)
    p_attack.add_argument("--generations", type=int, default=60)
    p_attack.add_argument("--concurrency", type=int, default=1, help="parallel oracle probes")

    p_base = sub.add_parser("baseline", help="random-unit comparison attack")
    _add_common_attack_args(p_base)
    p_base.add_argument("--budget", type=int, default=2000, help="max random units applied")

    p_metrics = sub.add_parser("metrics", help="compare two PNGs")
    p_metrics.add_argument("benign")
    p_metrics.add_argument("adversarial")
    p_metrics.add_argument("--sd-floor", type=float, default=1.0)
    p_metrics.add_argument(
        "--weights", type=_parse_weights, default=DEFAULT_CHANNEL_WEIGHTS, metavar="R,G,B"
    )
    p_metrics.add_argument("--breakdown", action="store_true", help="per-pixel detail")
    p_metrics.add_argument("--report", default=None, help="also write JSON to this path")
    return parser


def _build_oracle(args, parser, image_shape):
    if args.oracle == "remote":
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV_VAR)
        if not endpoint:
            parser.error(f"--oracle remote requires --endpoint or ${ENDPOINT_ENV_VAR}")
        return RemoteOracle(endpoint, bearer_token=args.bearer_token)
    return ToyClassifier(args.num_classes, args.oracle_seed, input_shape=image_shape)


def _resolve_goal(args, parser, oracle, benign):
    if args.mode == "targeted" and args.target_label is None:
        parser.error("--mode targeted requires --target-label")
    true_label = args.true_label
    if true_label is None:
        baseline = oracle.predict(benign)
        true_label, _ = baseline.top()
    return AttackGoal(
        mode=args.mode,
        true_label=true_label,
        target_label=args.target_label if args.mode == "targeted" else None,
    )


def _write_artifacts(args, report):
    out_path = Path(args.out) if args.out else Path(args.input).with_name(
        Path(args.input).stem + "_adv.png"
    )
    report_path = Path(args.report) if args.report else out_path.with_name(
        out_path.stem + "_report.json"
    )
    save_png(report.adversarial, out_path)
    report_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    print(f"adversarial image: {out_path}")
    print(f"report: {report_path}")


def _report_exit(report):
    status = "success" if report.success else "failure"
    print(
        f"{report.method}: {status} after {len(report.applied)} unit(s), "
        f"{report.oracle_calls} oracle call(s), perceptual loss "
        f"{report.mul_factor_loss:.4f}, L0={report.l0} L2={report.l2:.2f} "
        f"Linf={report.linf}"
    )
    if report.error:
        print(f"oracle error during synthesis: {report.error}", file=sys.stderr)
        return EXIT_ORACLE
    return EXIT_OK if report.success else EXIT_ATTACK_FAILED


def _cmd_attack(args, parser):
    benign = load_png(args.input)
    oracle = _build_oracle(args, parser, benign.shape[:2])
    goal = _resolve_goal(args, parser, oracle, benign)
    config = AttackConfig(
        de=DeConfig(
            population_size=args.pop_size,
            generations=args.generations,
            rng_seed=args.seed,
        ),
        weights=args.weights,
        sd_floor=args.sd_floor,
        max_units=args.max_units,
        max_concurrency=args.concurrency,
    )
    report = run_attack(benign, goal, config, oracle)
    _write_artifacts(args, report)
    return _report_exit(report)


def _cmd_baseline(args, parser):
    benign = load_png(args.input)
    oracle = _build_oracle(args, parser, benign.shape[:2])
    goal = _resolve_goal(args, parser, oracle, benign)
    report = random_baseline_attack(
        benign,
        goal,
        oracle,
        budget=args.budget,
        seed=args.seed,
        weights=args.weights,
        sd_floor=args.sd_floor,
    )
    _write_artifacts(args, report)
    return _report_exit(report)


def _cmd_metrics(args):
    benign = load_png(args.benign)
    adversarial = load_png(args.adversarial)
    norms = metrics_mod.lp_norms(benign, adversarial)
    mfl = metrics_mod.mul_factor_loss(
        benign, adversarial, weights=args.weights, sd_floor=args.sd_floor
    )
    payload = {
        "l0": norms.l0,
        "l2": norms.l2,
        "linf": norms.linf,
        "mul_factor_loss": mfl,
    }
    if args.breakdown:
        import numpy as np

        from .images import PerturbationUnit

        details = []
        for y, x in np.argwhere(np.any(benign != adversarial, axis=2)):
            px = adversarial[y, x]
            unit = PerturbationUnit(int(x), int(y), int(px[0]), int(px[1]), int(px[2]))
            b = metrics_mod.integ_loss(
                benign, unit, weights=args.weights, sd_floor=args.sd_floor
            )
            details.append(
                {
                    "x": int(x),
                    "y": int(y),
                    "ps": [float(v) for v in b.ps],
                    "sd": [float(v) for v in b.sd],
                    "terms": [float(v) for v in b.terms],
                    "total": b.total,
                }
            )
        payload["pixels"] = details
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if args.report:
        Path(args.report).write_text(text + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "attack":
            return _cmd_attack(args, parser)
        if args.command == "baseline":
            return _cmd_baseline(args, parser)
        return _cmd_metrics(args)
    except SystemExit as exc:  # argparse usage errors; keep main() returning int
        return EXIT_USAGE if exc.code is None else int(exc.code)
    except (ImageFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FitnessError as exc:
        cause = exc.__cause__
        if isinstance(cause, OracleError):
            print(f"oracle error: {cause}", file=sys.stderr)
            return EXIT_ORACLE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
