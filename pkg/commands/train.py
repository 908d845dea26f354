"""`train`: fit a PPO or SAC policy on a scenario family."""
import argparse
from functools import partial
from pathlib import Path

from commands import CommandResult, add_family_arguments, add_run_arguments, resolve_family
from models.rewards import RewardWeights
from models.trainer import TrainerConfig
from services.environment import BrakingEnv
from services.training import train
from utils.files import load_model, save_checkpoint, write_csv


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="train a PPO or SAC policy")
    parser.add_argument("--algo", required=True, choices=["ppo", "sac"], help="learning algorithm")
    parser.add_argument("--steps", type=int, default=None, help="total environment steps")
    parser.add_argument("--trainer-file", default=None, help="trainer hyperparameters JSON")
    parser.add_argument("--weights-file", default=None, help="reward weights JSON")
    add_family_arguments(parser, default="low-delay")
    add_run_arguments(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, out_dir: Path) -> CommandResult:
    family = resolve_family(args)
    weights = load_model(args.weights_file, RewardWeights)
    config = load_model(args.trainer_file, TrainerConfig, {"algorithm": args.algo, "total_steps": args.steps})

    policy, curve = train(config.algorithm, partial(BrakingEnv, family=family, weights=weights), config, args.seed)

    outputs = [
        save_checkpoint(policy, config.algorithm, out_dir / f"policy-{config.algorithm}.pt"),
        write_csv(curve, out_dir / f"curve-{config.algorithm}.csv"),
    ]
    return CommandResult(
        resolved_config={
            "family": family.model_dump(),
            "weights": weights.model_dump(),
            "trainer": config.model_dump(),
        },
        outputs=outputs,
        config_paths={
            "family": args.family_file,
            "weights": args.weights_file,
            "trainer": args.trainer_file,
        },
    )
