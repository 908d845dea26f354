"""Subcommands of the braking lab CLI.

Each module exposes ``register(subparsers)`` which adds its parser and sets
``handler`` to a function ``(args, out_dir) -> CommandResult``.
"""
import argparse
import logging
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

from config import settings
from models.evaluation import ScenarioFamily
from models.scenario import PRESETS, ScenarioConfig, preset
from services.evaluation import FAMILIES
from services.networks import PolicyNetwork
from utils.errors import ConfigError
from utils.files import load_checkpoint, load_model, load_scenario

logger = logging.getLogger(__name__)


class CommandResult(NamedTuple):
    resolved_config: Dict[str, Any]
    outputs: List[Path]
    config_paths: Optional[Dict[str, Optional[str]]] = None


def add_run_arguments(parser: argparse.ArgumentParser, jobs: bool = False) -> None:
    parser.add_argument(
        "--seed", type=int, default=None, help=f"master random seed (default: family file, then {settings.DEFAULT_SEED})"
    )
    parser.add_argument("--out", default=None, help=f"output directory (default: {settings.OUTPUT_DIR}/<command>)")
    if jobs:
        parser.add_argument("--jobs", type=int, default=settings.JOBS, help="worker processes")


def add_scenario_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario-file", default=None, help="scenario JSON (fields override the default scenario)")
    parser.add_argument("--preset", default=None, choices=sorted(PRESETS), help="named scenario")
    parser.add_argument("--d1", type=float, default=None, help="initial gap between vehicles 1 and 2 (m)")
    parser.add_argument("--d2", type=float, default=None, help="initial gap between vehicles 2 and 3 (m)")


def add_family_arguments(parser: argparse.ArgumentParser, default: str) -> None:
    parser.add_argument("--family", default=default, choices=sorted(FAMILIES), help="named scenario family")
    parser.add_argument("--family-file", default=None, help="scenario family JSON (fields override the named family)")
    parser.add_argument("--count", type=int, default=None, help=f"number of scenarios (default {settings.CI_SCENARIOS})")
    parser.add_argument("--full", action="store_true", help=f"full-size run ({settings.FULL_SCENARIOS} scenarios)")


def add_policy_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ppo", default=None, help="PPO policy checkpoint")
    parser.add_argument("--sac", default=None, help="SAC policy checkpoint")


def resolve_scenario(args: argparse.Namespace) -> ScenarioConfig:
    overrides = {key: value for key, value in (("d1_0", args.d1), ("d2_0", args.d2)) if value is not None}
    if args.scenario_file:
        return load_scenario(args.scenario_file, overrides)
    base = preset(args.preset or "default").model_dump()
    return load_scenario(None, {**base, **overrides})


def resolve_seed(args: argparse.Namespace) -> int:
    return settings.DEFAULT_SEED if args.seed is None else args.seed


def resolve_family(args: argparse.Namespace) -> ScenarioFamily:
    """Named family < family file < flags; the seed actually used is written back to ``args.seed``."""
    base = {**FAMILIES[args.family].model_dump(), "seed": settings.DEFAULT_SEED}
    if args.family_file:
        base.update(load_model(args.family_file, ScenarioFamily).model_dump(exclude_unset=True))
    count = settings.FULL_SCENARIOS if getattr(args, "full", False) else getattr(args, "count", None)
    flags = {key: value for key, value in (("count", count), ("seed", args.seed)) if value is not None}
    family = load_model(None, ScenarioFamily, {**base, **flags})
    args.seed = family.seed
    logger.info(f"Scenario family '{family.name}': {family.count} scenarios, seed {family.seed}")
    return family


def load_policies(args: argparse.Namespace) -> Dict[str, PolicyNetwork]:
    policies = {}
    for name in ("ppo", "sac"):
        path = getattr(args, name, None)
        if path:
            _, policies[name] = load_checkpoint(path)
    return policies


def parse_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_floats(text: str, name: str) -> List[float]:
    """Comma list ``a,b,c`` or range ``start:stop:step`` (stop included)."""
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            count = int(round((stop - start) / step)) + 1
            return [start + index * step for index in range(count)]
        return [float(item) for item in parse_list(text)]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError([f"{name}: cannot parse '{text}' ({exc})"]) from exc


def parse_delay_pairs(text: str) -> List[Tuple[float, float]]:
    pairs = []
    for item in parse_list(text):
        try:
            tau2, tau3 = (float(part) for part in item.split(":"))
        except ValueError as exc:
            raise ConfigError([f"delays: expected tau2:tau3, got '{item}'"]) from exc
        pairs.append((tau2, tau3))
    return pairs


def default_strategies(policies: Dict[str, PolicyNetwork]) -> List[str]:
    strategies = ["non-ethical", "baseline"]
    for name in ("ppo", "sac"):
        if name in policies:
            strategies.extend([name, f"hybrid-{name}"])
    return strategies
