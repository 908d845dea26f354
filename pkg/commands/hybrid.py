"""`hybrid`: run the shielded policy and log every shield decision."""
import argparse
import logging
from pathlib import Path

import pandas as pd

from commands import (
    CommandResult,
    add_family_arguments,
    add_run_arguments,
    add_scenario_arguments,
    resolve_family,
    resolve_scenario,
)
from config import settings
from services.baseline import ConstantDecelController, NonEthicalController, solve
from services.evaluation import evaluate, sample_scenarios, summary_frame, summary_table
from services.physics import rollout, trajectory_frame
from services.shield import PolicyController, shielded_controller
from utils.files import load_checkpoint, write_csv

logger = logging.getLogger(__name__)

DECISION_COLUMNS = ["scenario_id", "h_rl", "h_star", "a_star", "beta_safe", "executed_harm"]


def register(subparsers) -> None:
    parser = subparsers.add_parser("hybrid", help="run the hybrid shield with a trained policy")
    parser.add_argument("--policy", required=True, help="policy checkpoint (PPO or SAC)")
    parser.add_argument("--grid-step", type=float, default=settings.BASELINE_GRID_STEP, help="baseline grid step (m/s^2)")
    add_scenario_arguments(parser)
    add_family_arguments(parser, default="random-test")
    add_run_arguments(parser, jobs=True)
    parser.set_defaults(handler=run)


def _single_scenario(args: argparse.Namespace) -> bool:
    return any(value is not None for value in (args.scenario_file, args.preset, args.d1, args.d2))


def _trajectories(policy, scenario, grid_step: float, algorithm: str, out_dir: Path) -> list:
    """Per-step trajectories of the four strategies on one scenario."""
    solution = solve(scenario, grid_step)
    controllers = {
        "non-ethical": NonEthicalController(),
        "baseline": ConstantDecelController(solution.a_star),
        algorithm: PolicyController(policy),
        f"hybrid-{algorithm}": shielded_controller(policy, scenario, solution, grid_step),
    }
    return [
        write_csv(trajectory_frame(rollout(scenario, controller), scenario), out_dir / f"trajectory-{name}.csv")
        for name, controller in controllers.items()
    ]


def run(args: argparse.Namespace, out_dir: Path) -> CommandResult:
    algorithm, policy = load_checkpoint(args.policy)
    hybrid = f"hybrid-{algorithm}"
    strategies = ["non-ethical", "baseline", algorithm, hybrid]

    if _single_scenario(args):
        scenarios = [resolve_scenario(args)]
        source = {"scenario": scenarios[0].model_dump()}
    else:
        family = resolve_family(args)
        scenarios = sample_scenarios(family)
        source = {"family": family.model_dump()}

    summaries, outcomes = evaluate(strategies, scenarios, {algorithm: policy}, args.grid_step, args.jobs)
    print(summary_table(summaries))

    decisions = outcomes[outcomes["strategy"] == hybrid].rename(columns={"harm": "executed_harm"})
    kept = int((decisions["beta_safe"] == 1.0).sum())
    logger.info(f"Shield kept the {algorithm} policy on {kept} of {len(decisions)} scenario(s)")
    outputs = [
        write_csv(pd.DataFrame(decisions, columns=DECISION_COLUMNS), out_dir / "decisions.csv"),
        write_csv(summary_frame(summaries), out_dir / "summary.csv"),
    ]
    if len(scenarios) == 1:
        outputs.extend(_trajectories(policy, scenarios[0], args.grid_step, algorithm, out_dir))

    return CommandResult(
        resolved_config={**source, "checkpoint": args.policy, "algorithm": algorithm, "grid_step": args.grid_step},
        outputs=outputs,
        config_paths={"scenario": args.scenario_file, "family": args.family_file, "policy": args.policy},
    )
