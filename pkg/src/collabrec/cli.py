"""Command-line entry point.

    collabrec run --dataset movielens --data u.data --out results/ \
        --methods individual,centralized,collaboration --learners fm,ridge \
        --parties 9 --users-per-party 100 --p-tilde 100,200,400 \
        --p-hat-ratio 0.5,1,2 --anchor 1000 --reps 10 --seed 42

Exit status 0 on success; on failure, a stage-tagged message goes to
stderr and the status is nonzero. Partial per-repetition results are kept
in the output directory.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import ExperimentConfig, HarnessError, run_experiment
from .learners import TrainConfig


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _name_list(options):
    def parse(text: str) -> tuple:
        names = tuple(part.strip() for part in text.split(",") if part.strip())
        for name in names:
            if name not in options:
                raise argparse.ArgumentTypeError(
                    f"{name!r} is not one of {', '.join(options)}"
                )
        return names

    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collabrec",
        description="Multi-party rating-prediction experiments",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an experiment grid")
    run.add_argument("--dataset", required=True, choices=("movielens", "sushi"))
    run.add_argument("--data", required=True, help="path to the rating file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument(
        "--methods",
        type=_name_list(("individual", "centralized", "collaboration")),
        default=("individual", "centralized", "collaboration"),
        help="comma-separated analysis methods",
    )
    run.add_argument(
        "--learners",
        type=_name_list(("fm", "ridge")),
        default=("fm",),
        help="comma-separated learners",
    )
    run.add_argument("--parties", type=int, default=9)
    run.add_argument("--users-per-party", type=int, default=100)
    run.add_argument(
        "--p-tilde", type=_int_list, default=(100, 200, 400),
        help="encoding widths, comma-separated",
    )
    run.add_argument(
        "--p-hat-ratio", type=_float_list, default=None,
        help="shared widths as multiples of each encoding width",
    )
    run.add_argument(
        "--p-hat", type=_int_list, default=None,
        help="shared widths as absolute values (overrides --p-hat-ratio)",
    )
    run.add_argument("--anchor", type=int, default=1000,
                     help="rows in the shared reference block")
    run.add_argument("--reps", type=int, default=10)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--test-fraction", type=float, default=0.2)
    run.add_argument("--vertical", action="store_true",
                     help="swap user/item roles before partitioning")
    run.add_argument("--clip", action="store_true",
                     help="clip predictions to the rating scale")
    run.add_argument("--reduce-dims", type=int, default=None,
                     help="project ridge inputs to this width first")
    run.add_argument("--party-sweep", type=_int_list, default=None,
                     help="evaluate these party counts (nested prefixes)")
    run.add_argument("--fm-epochs", type=int, default=None,
                     help="override the factorization-machine epoch count")
    run.add_argument("--fm-latent", type=int, default=None,
                     help="override the factorization-machine latent width")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    fm = TrainConfig()
    if args.fm_epochs is not None:
        fm = replace(fm, epochs=args.fm_epochs)
    if args.fm_latent is not None:
        fm = replace(fm, q=args.fm_latent)
    ratios = args.p_hat_ratio
    if args.p_hat is None and ratios is None:
        ratios = (0.5, 1.0, 2.0)
    return ExperimentConfig(
        dataset=args.dataset,
        data_path=args.data,
        output_dir=args.out,
        methods=args.methods,
        learners=args.learners,
        parties=args.parties,
        users_per_party=args.users_per_party,
        p_tilde=args.p_tilde,
        p_hat_ratios=None if args.p_hat else ratios,
        p_hat_absolute=args.p_hat,
        anchor_size=args.anchor,
        test_fraction=args.test_fraction,
        repetitions=args.reps,
        base_seed=args.seed,
        vertical=args.vertical,
        clip_predictions=args.clip,
        reduce_dims=args.reduce_dims,
        party_sweep=args.party_sweep,
        fm=fm,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = run_experiment(_config_from_args(args))
    except (HarnessError, OSError, ValueError) as err:
        print(f"collabrec: error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {len(result.rows)} result rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
