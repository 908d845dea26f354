"""Hybrid safety shield: run the learned policy only when it does no worse than the baseline.

The learned policy is rolled out in closed loop on the deterministic
simulator; its predicted harm is compared with the best constant-deceleration
harm and the lower-harm strategy is executed. Prediction and execution share
the simulator and time step, so the executed harm equals the prediction.
"""
import logging
from typing import Optional, Tuple

import torch

from config import settings
from models.baseline import BaselineSolution
from models.harm import CountingPolicy
from models.scenario import ScenarioConfig
from models.shield import ShieldDecision
from models.state import SimState
from services.baseline import ConstantDecelController, solve
from services.environment import observe, scale_action
from services.harm import accumulate
from services.networks import DTYPE, PolicyNetwork
from services.physics import Controller, rollout

logger = logging.getLogger(__name__)


class PolicyController:
    """Deterministic (mean-action) controller backed by a policy network."""

    def __init__(self, policy: PolicyNetwork):
        self.policy = policy

    def __call__(self, state: SimState, scenario: ScenarioConfig) -> float:
        obs = torch.as_tensor(observe(state, scenario), dtype=DTYPE)
        with torch.no_grad():
            raw = float(self.policy.mean_action(obs)[0])
        return scale_action(raw, scenario.vehicles[1])


def _as_controller(policy) -> Controller:
    return PolicyController(policy) if isinstance(policy, PolicyNetwork) else policy


def predict_harm(policy, scenario: ScenarioConfig) -> float:
    """First-per-pair harm of a closed-loop rollout of ``policy`` over the full horizon."""
    trajectory = rollout(scenario, _as_controller(policy))
    return accumulate(trajectory.events, CountingPolicy.FIRST_PER_PAIR).total


def decide(h_rl: float, h_star: float) -> int:
    """1 keeps the learned policy; ties go to it."""
    return 1 if h_rl <= h_star else 0


def shield_decision(
    policy,
    scenario: ScenarioConfig,
    baseline: Optional[BaselineSolution] = None,
    grid_step: Optional[float] = None,
) -> Tuple[ShieldDecision, Optional[BaselineSolution]]:
    h_rl = predict_harm(policy, scenario)
    if h_rl == 0.0 and baseline is None:
        # nothing can beat zero harm; the sweep is skipped
        return ShieldDecision(beta_safe=1, h_rl=h_rl, baseline_skipped=True), None
    if baseline is None:
        baseline = solve(scenario, grid_step or settings.BASELINE_GRID_STEP)
    decision = ShieldDecision(
        beta_safe=decide(h_rl, baseline.h_star),
        h_rl=h_rl,
        h_star=baseline.h_star,
        a_star=baseline.a_star,
    )
    logger.debug(f"Shield: h_rl={h_rl:.4f} h*={baseline.h_star:.4f} beta={decision.beta_safe}")
    return decision, baseline


class ShieldedController:
    """Controller chosen once per emergency; ``decision`` records why."""

    def __init__(self, controller: Controller, decision: ShieldDecision, baseline: Optional[BaselineSolution]):
        self.controller = controller
        self.decision = decision
        self.baseline = baseline

    def __call__(self, state: SimState, scenario: ScenarioConfig) -> float:
        return self.controller(state, scenario)


def shielded_controller(
    policy,
    scenario: ScenarioConfig,
    baseline: Optional[BaselineSolution] = None,
    grid_step: Optional[float] = None,
) -> ShieldedController:
    decision, baseline = shield_decision(policy, scenario, baseline, grid_step)
    if decision.beta_safe == 1:
        return ShieldedController(_as_controller(policy), decision, baseline)
    return ShieldedController(ConstantDecelController(baseline.a_star), decision, baseline)
