"""`baseline`: solve the constant-deceleration baseline for one scenario."""
import argparse
import logging
from pathlib import Path

from commands import CommandResult, add_run_arguments, add_scenario_arguments, resolve_scenario
from config import settings
from services.baseline import solve_with_curve
from utils.errors import ConfigError
from utils.files import write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("baseline", help="best constant deceleration and the harm-vs-a2 curve")
    parser.add_argument("--grid-step", type=float, default=settings.BASELINE_GRID_STEP, help="grid step (m/s^2)")
    parser.add_argument("--dt", type=float, default=settings.FINE_DT, help="simulation step for the sweep (s)")
    add_scenario_arguments(parser)
    add_run_arguments(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, out_dir: Path) -> CommandResult:
    scenario = resolve_scenario(args)
    if not args.grid_step > 0 or not args.dt > 0:
        raise ConfigError([f"grid_step/dt: must be > 0 (got {args.grid_step}, {args.dt})"])
    logger.info(f"Sweeping constant decelerations: grid_step={args.grid_step} dt={args.dt}")
    solution, curve = solve_with_curve(scenario, args.grid_step, dt=args.dt)

    print(f"a_star = {solution.a_star:.4f} m/s^2")
    print(f"H_star = {solution.h_star:.6f} m^2/s^2")
    if solution.zero_harm_interval is not None:
        low, high = solution.zero_harm_interval
        print(f"zero-harm interval = [{low:.4f}, {high:.4f}] m/s^2")

    solution_path = out_dir / "baseline.json"
    solution_path.write_text(solution.model_dump_json(indent=2))
    outputs = [solution_path, write_csv(curve, out_dir / "harm-vs-a2.csv")]
    return CommandResult(
        resolved_config={"scenario": scenario.model_dump(), "grid_step": args.grid_step, "dt": args.dt},
        outputs=outputs,
        config_paths={"scenario": args.scenario_file},
    )
