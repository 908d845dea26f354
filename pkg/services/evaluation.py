"""Monte-Carlo comparison of braking strategies.

Every strategy runs on every scenario under identical conditions. Scenarios
are independent, so they are spread over worker processes; results are
always folded back in scenario order, which keeps summaries bitwise
reproducible whatever the worker count.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import torch

from config import settings
from models.baseline import BaselineSolution
from models.evaluation import EvalSummary, ScenarioFamily
from models.scenario import ScenarioConfig
from services.baseline import ConstantDecelController, NonEthicalController, solve
from services.harm import accumulate
from services.networks import PolicyNetwork
from services.physics import rollout
from services.shield import PolicyController, shielded_controller
from utils.errors import BrakingLabError, ConfigError, ContractViolation
from utils.seeding import derive_seed, episode_generators

logger = logging.getLogger(__name__)

REFERENCE = "non-ethical"
STRATEGIES = ("non-ethical", "baseline", "ppo", "sac", "hybrid-ppo", "hybrid-sac")

FAMILIES: Dict[str, ScenarioFamily] = {
    "random-test": ScenarioFamily(count=settings.CI_SCENARIOS),
    "fixed-speed": ScenarioFamily(name="fixed-speed", count=settings.CI_SCENARIOS, v1_range=(20.0, 20.0), v2_range=(18.0, 18.0), v3_range=(20.0, 20.0)),
    "low-delay": ScenarioFamily(name="low-delay", count=settings.CI_SCENARIOS, tau2=0.5, tau3=0.8),
    "high-delay": ScenarioFamily(name="high-delay", count=settings.CI_SCENARIOS, tau2=1.2, tau3=1.6),
}

DEFAULT_DELAY_PAIRS: Tuple[Tuple[float, float], ...] = ((0.5, 0.8), (0.8, 1.2), (1.2, 1.6))

OUTCOME_COLUMNS = [
    "scenario_id", "strategy", "harm", "collided", "events",
    "beta_safe", "h_rl", "h_star", "a_star", "error",
]


class EpisodeOutcome(NamedTuple):
    scenario_id: int
    strategy: str
    harm: float = math.nan
    collided: bool = False
    events: int = 0
    beta_safe: float = math.nan
    h_rl: float = math.nan
    h_star: float = math.nan
    a_star: float = math.nan
    error: str = ""


def sample_scenarios(family: ScenarioFamily, seed: Optional[int] = None) -> List[ScenarioConfig]:
    """``family.count`` scenarios; episode k always comes from the k-th child stream of the seed."""
    master = family.seed if seed is None else seed
    return [family.draw(rng) for rng in episode_generators(master, family.count)]


def _policy_name(strategy: str) -> str:
    return strategy.split("-", 1)[1] if strategy.startswith("hybrid-") else strategy


def check_strategies(strategies: Sequence[str], policies: Dict[str, PolicyNetwork]) -> None:
    issues = [f"strategies: unknown strategy '{name}'" for name in strategies if name not in STRATEGIES]
    for name in strategies:
        if name in ("ppo", "sac", "hybrid-ppo", "hybrid-sac") and _policy_name(name) not in policies:
            issues.append(f"strategies: '{name}' needs a {_policy_name(name)} checkpoint")
    if issues:
        raise ConfigError(issues)


def _run_scenario(
    item: Tuple[int, ScenarioConfig],
    strategies: Sequence[str],
    policies: Dict[str, PolicyNetwork],
    grid_step: float,
) -> List[EpisodeOutcome]:
    scenario_id, scenario = item
    baseline: Optional[BaselineSolution] = None
    outcomes = []
    for strategy in strategies:
        extra = {}
        try:
            if strategy == "non-ethical":
                controller = NonEthicalController()
            elif strategy == "baseline":
                baseline = baseline or solve(scenario, grid_step)
                controller = ConstantDecelController(baseline.a_star)
                extra = {"h_star": baseline.h_star, "a_star": baseline.a_star}
            elif strategy.startswith("hybrid-"):
                controller = shielded_controller(policies[_policy_name(strategy)], scenario, baseline, grid_step)
                baseline = baseline or controller.baseline
                decision = controller.decision
                extra = {
                    "beta_safe": float(decision.beta_safe),
                    "h_rl": decision.h_rl,
                    "h_star": math.nan if decision.h_star is None else decision.h_star,
                    "a_star": math.nan if decision.a_star is None else decision.a_star,
                }
            else:
                controller = PolicyController(policies[strategy])
            report = accumulate(rollout(scenario, controller).events)
        except (BrakingLabError, ValueError, FloatingPointError) as exc:
            logger.warning(f"Scenario {scenario_id}, strategy {strategy} failed: {exc}")
            outcomes.append(EpisodeOutcome(scenario_id, strategy, error=str(exc)))
            continue
        outcomes.append(EpisodeOutcome(
            scenario_id,
            strategy,
            harm=report.total,
            collided=report.events_observed > 0,
            events=report.events_observed,
            **extra,
        ))
    return outcomes


def _init_worker() -> None:
    torch.set_num_threads(1)


def run_episodes(
    strategies: Sequence[str],
    scenarios: Sequence[ScenarioConfig],
    policies: Optional[Dict[str, PolicyNetwork]] = None,
    grid_step: Optional[float] = None,
    jobs: int = 1,
) -> pd.DataFrame:
    """One row per (scenario, strategy), in scenario order."""
    policies = policies or {}
    check_strategies(strategies, policies)
    worker = partial(
        _run_scenario,
        strategies=tuple(strategies),
        policies=policies,
        grid_step=grid_step or settings.BASELINE_GRID_STEP,
    )
    items = list(enumerate(scenarios))
    if jobs > 1 and len(items) > 1:
        chunksize = max(1, math.ceil(len(items) / (jobs * 4)))
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as executor:
            per_scenario = list(executor.map(worker, items, chunksize=chunksize))
    else:
        per_scenario = [worker(item) for item in items]
    rows = [outcome._asdict() for outcomes in per_scenario for outcome in outcomes]
    return pd.DataFrame(rows, columns=OUTCOME_COLUMNS)


def summarize(outcomes: pd.DataFrame, strategies: Sequence[str]) -> List[EvalSummary]:
    failed = outcomes.loc[outcomes["error"] != "", "scenario_id"].unique()
    if len(failed):
        logger.warning(f"Excluding {len(failed)} scenario(s) with failed rollouts")
    kept = outcomes[~outcomes["scenario_id"].isin(failed)]

    def _stats(strategy: str) -> Tuple[int, int, float, float]:
        rows = kept[kept["strategy"] == strategy]
        harm = rows["harm"].to_numpy(dtype=float)
        if harm.size == 0:
            return 0, 0, 0.0, 0.0
        return harm.size, int(rows["collided"].sum()), float(harm.mean()), float(harm.std())

    reference_avg = _stats(REFERENCE)[2]
    if reference_avg == 0.0:
        logger.warning("Reference strategy caused no harm; harm decrease is undefined and reported as 0")

    summaries = []
    for strategy in strategies:
        episodes, collisions, avg_harm, std_harm = _stats(strategy)
        defined = reference_avg > 0.0
        summaries.append(EvalSummary(
            strategy=strategy,
            episodes=episodes,
            excluded=len(failed),
            collisions=collisions,
            collision_rate=collisions / episodes if episodes else 0.0,
            avg_harm=avg_harm,
            std_harm=std_harm,
            harm_decrease_vs_reference=1.0 - avg_harm / reference_avg if defined else 0.0,
            decrease_defined=defined,
        ))
    return summaries


def evaluate(
    strategies: Sequence[str],
    scenarios: Sequence[ScenarioConfig],
    policies: Optional[Dict[str, PolicyNetwork]] = None,
    grid_step: Optional[float] = None,
    jobs: int = 1,
) -> Tuple[List[EvalSummary], pd.DataFrame]:
    """Summaries for ``strategies`` (the reference always runs) plus the per-episode outcomes."""
    needed = list(strategies) if REFERENCE in strategies else [REFERENCE, *strategies]
    logger.info(f"Evaluating {', '.join(strategies)} on {len(scenarios)} scenarios (jobs={jobs})")
    outcomes = run_episodes(needed, scenarios, policies, grid_step, jobs)
    return summarize(outcomes, strategies), outcomes


def summary_frame(summaries: Sequence[EvalSummary]) -> pd.DataFrame:
    return pd.DataFrame([summary.model_dump() for summary in summaries])


def summary_table(summaries: Sequence[EvalSummary]) -> str:
    """Metrics as rows, strategies as columns."""
    table = pd.DataFrame(
        {
            summary.strategy: {
                "Collisions": summary.collisions,
                "Collision rate": f"{summary.collision_rate:.2%}",
                "Average harm": f"{summary.avg_harm:.4f}",
                "Harm decrease": f"{summary.harm_decrease_vs_reference:.2%}" if summary.decrease_defined else "n/a",
            }
            for summary in summaries
        }
    )
    return table.to_string()


def harm_vs_distance_curve(
    base: ScenarioConfig,
    distances: Sequence[float],
    samples_per_point: int,
    seed: int,
    strategies: Sequence[str],
    policies: Optional[Dict[str, PolicyNetwork]] = None,
    grid_step: Optional[float] = None,
    jobs: int = 1,
) -> pd.DataFrame:
    """Average harm per strategy against total initial distance d1_0 + d2_0.

    Each sample splits the distance uniformly, keeping both gaps at least 1 m.
    """
    scenarios, point_of = [], []
    for point, distance in enumerate(distances):
        if distance < 2.0:
            raise ContractViolation(f"total distance must be >= 2 m (got {distance})")
        for rng in episode_generators(derive_seed(seed, point), samples_per_point):
            d1 = float(rng.uniform(1.0, distance - 1.0))
            scenarios.append(base.model_copy(update={"d1_0": d1, "d2_0": distance - d1}))
            point_of.append(point)

    outcomes = run_episodes(strategies, scenarios, policies, grid_step, jobs)
    outcomes["distance"] = [distances[point_of[i]] for i in outcomes["scenario_id"]]
    curve = (
        outcomes[outcomes["error"] == ""]
        .groupby(["distance", "strategy"], sort=False)["harm"]
        .agg(avg_harm="mean", std_harm=lambda harm: float(np.std(harm.to_numpy())), samples="size")
        .reset_index()
    )
    return curve


def harm_vs_delay(
    base: ScenarioConfig,
    delay_pairs: Sequence[Tuple[float, float]],
    strategies: Sequence[str],
    policies: Optional[Dict[str, PolicyNetwork]] = None,
    grid_step: Optional[float] = None,
    jobs: int = 1,
) -> pd.DataFrame:
    """Harm per strategy for each (tau2, tau3) on the otherwise fixed scenario."""
    scenarios = [base.model_copy(update={"tau2": tau2, "tau3": tau3}) for tau2, tau3 in delay_pairs]
    outcomes = run_episodes(strategies, scenarios, policies, grid_step, jobs)
    outcomes["tau2"] = [delay_pairs[i][0] for i in outcomes["scenario_id"]]
    outcomes["tau3"] = [delay_pairs[i][1] for i in outcomes["scenario_id"]]
    return outcomes[["tau2", "tau3", "strategy", "harm", "collided", "error"]]
