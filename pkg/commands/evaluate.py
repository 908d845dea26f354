"""`evaluate`: compare strategies on a Monte-Carlo scenario family."""
import argparse
from pathlib import Path

from commands import (
    CommandResult,
    add_family_arguments,
    add_policy_arguments,
    add_run_arguments,
    default_strategies,
    load_policies,
    parse_list,
    resolve_family,
)
from config import settings
from services.evaluation import STRATEGIES, evaluate, sample_scenarios, summary_frame, summary_table
from utils.files import write_csv


def register(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="evaluate strategies on a scenario family")
    parser.add_argument(
        "--strategies",
        default=None,
        help=f"comma list from {', '.join(STRATEGIES)} (default: every strategy the given checkpoints allow)",
    )
    parser.add_argument("--grid-step", type=float, default=settings.BASELINE_GRID_STEP, help="baseline grid step (m/s^2)")
    add_policy_arguments(parser)
    add_family_arguments(parser, default="random-test")
    add_run_arguments(parser, jobs=True)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, out_dir: Path) -> CommandResult:
    family = resolve_family(args)
    policies = load_policies(args)
    strategies = parse_list(args.strategies) if args.strategies else default_strategies(policies)

    scenarios = sample_scenarios(family)
    summaries, outcomes = evaluate(strategies, scenarios, policies, args.grid_step, args.jobs)
    print(summary_table(summaries))

    outputs = [
        write_csv(summary_frame(summaries), out_dir / "summary.csv"),
        write_csv(outcomes, out_dir / "episodes.csv"),
    ]
    return CommandResult(
        resolved_config={
            "family": family.model_dump(),
            "strategies": strategies,
            "grid_step": args.grid_step,
            "checkpoints": {"ppo": args.ppo, "sac": args.sac},
        },
        outputs=outputs,
        config_paths={"family": args.family_file, "ppo": args.ppo, "sac": args.sac},
    )
