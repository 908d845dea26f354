"""`curves`: harm against total initial distance and against V2X delays."""
import argparse
import logging
from pathlib import Path

from commands import (
    CommandResult,
    add_policy_arguments,
    add_run_arguments,
    add_scenario_arguments,
    default_strategies,
    load_policies,
    parse_delay_pairs,
    parse_floats,
    parse_list,
    resolve_scenario,
    resolve_seed,
)
from config import settings
from services.evaluation import DEFAULT_DELAY_PAIRS, harm_vs_delay, harm_vs_distance_curve
from utils.files import write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("curves", help="harm-vs-distance and harm-vs-delay curve data")
    parser.add_argument("--kind", choices=["distance", "delay", "both"], default="both")
    parser.add_argument("--distances", default="10:40:2", help="total distances (m): list a,b,c or range start:stop:step")
    parser.add_argument("--samples", type=int, default=20, help="random gap splits per distance")
    parser.add_argument(
        "--delays",
        default=",".join(f"{tau2}:{tau3}" for tau2, tau3 in DEFAULT_DELAY_PAIRS),
        help="delay pairs tau2:tau3, comma separated",
    )
    parser.add_argument("--strategies", default=None, help="comma list (default: every strategy the checkpoints allow)")
    parser.add_argument("--grid-step", type=float, default=settings.BASELINE_GRID_STEP, help="baseline grid step (m/s^2)")
    add_policy_arguments(parser)
    add_scenario_arguments(parser)
    add_run_arguments(parser, jobs=True)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, out_dir: Path) -> CommandResult:
    scenario = resolve_scenario(args)
    policies = load_policies(args)
    strategies = parse_list(args.strategies) if args.strategies else default_strategies(policies)
    resolved = {"scenario": scenario.model_dump(), "strategies": strategies, "grid_step": args.grid_step}
    outputs = []

    if args.kind in ("distance", "both"):
        distances = parse_floats(args.distances, "distances")
        logger.info(f"Harm vs distance: {len(distances)} distances x {args.samples} samples")
        curve = harm_vs_distance_curve(
            scenario, distances, args.samples, resolve_seed(args), strategies, policies, args.grid_step, args.jobs
        )
        outputs.append(write_csv(curve, out_dir / "harm-vs-distance.csv"))
        resolved.update(distances=distances, samples=args.samples)

    if args.kind in ("delay", "both"):
        delay_pairs = parse_delay_pairs(args.delays)
        logger.info(f"Harm vs delay: {len(delay_pairs)} delay pairs")
        curve = harm_vs_delay(scenario, delay_pairs, strategies, policies, args.grid_step, args.jobs)
        outputs.append(write_csv(curve, out_dir / "harm-vs-delay.csv"))
        resolved.update(delay_pairs=delay_pairs)

    return CommandResult(
        resolved_config=resolved,
        outputs=outputs,
        config_paths={"scenario": args.scenario_file, "ppo": args.ppo, "sac": args.sac},
    )
