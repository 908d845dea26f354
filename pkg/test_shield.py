"""Hybrid safety shield: harm prediction, switching rule and dominance."""
import pytest
from pydantic import ValidationError

from conftest import constant_policy
from models.evaluation import ScenarioFamily
from models.harm import CountingPolicy
from models.shield import ShieldDecision
from services.baseline import ConstantDecelController, non_ethical, solve
from services.harm import accumulate
from services.physics import rollout
from services.shield import PolicyController, decide, predict_harm, shield_decision, shielded_controller
from utils.seeding import episode_generators

GRID_STEP = 0.5


def _executed_harm(scenario, controller):
    return accumulate(rollout(scenario, controller).events, CountingPolicy.FIRST_PER_PAIR).total


@pytest.mark.parametrize("h_rl, h_star, expected", [(3.0, 5.0, 1), (5.0, 3.0, 0), (4.0, 4.0, 1)])
def test_decide(h_rl, h_star, expected):
    assert decide(h_rl, h_star) == expected


def test_decision_must_match_the_rule():
    with pytest.raises(ValidationError):
        ShieldDecision(beta_safe=0, h_rl=1.0, h_star=2.0, a_star=3.0)
    with pytest.raises(ValidationError):
        ShieldDecision(beta_safe=1, h_rl=1.0)


def test_policy_controller_scales_the_mean_action(tight_scenario):
    controller = PolicyController(constant_policy(0.5))
    state = rollout(tight_scenario, non_ethical).states[0]
    assert controller(state, tight_scenario) == pytest.approx(3.5)


def test_prediction_on_wide_gaps_is_zero(wide_scenario, braking_policy):
    assert predict_harm(braking_policy, wide_scenario) == 0.0


def test_full_braking_policy_predicts_non_ethical_harm(tight_scenario, braking_policy):
    assert predict_harm(braking_policy, tight_scenario) == _executed_harm(tight_scenario, non_ethical)


def test_prediction_is_an_independent_rollout(tight_scenario):
    policy = constant_policy(-0.3)
    assert predict_harm(policy, tight_scenario) == _executed_harm(tight_scenario, PolicyController(policy))
    assert predict_harm(policy, tight_scenario) == predict_harm(policy, tight_scenario)


def test_safe_policy_skips_the_baseline(wide_scenario, braking_policy):
    decision, baseline = shield_decision(braking_policy, wide_scenario)
    assert decision.baseline_skipped
    assert decision.beta_safe == 1
    assert baseline is None
    assert decision.h_star is None


def test_harmful_policy_falls_back_to_the_baseline(tight_scenario, accelerating_policy):
    controller = shielded_controller(accelerating_policy, tight_scenario, grid_step=GRID_STEP)
    solution = solve(tight_scenario, GRID_STEP)
    assert controller.decision.beta_safe == 0
    assert controller.decision.h_rl > solution.h_star
    assert isinstance(controller.controller, ConstantDecelController)
    assert _executed_harm(tight_scenario, controller) == solution.h_star


def test_given_baseline_is_reused(tight_scenario, braking_policy):
    solution = solve(tight_scenario, GRID_STEP)
    decision, baseline = shield_decision(braking_policy, tight_scenario, baseline=solution)
    assert baseline is solution
    assert decision.h_star == solution.h_star
    assert decision.beta_safe == int(decision.h_rl <= solution.h_star)


def _dominance_scenarios(tight_scenario):
    family = ScenarioFamily(count=6)
    return [tight_scenario, *(family.draw(rng) for rng in episode_generators(21, family.count))]


@pytest.mark.parametrize("raw", [-1.0, -0.5, 0.0, 0.5, 1.0])
def test_executed_harm_is_the_minimum(tight_scenario, raw):
    policy = constant_policy(raw)
    for scenario in _dominance_scenarios(tight_scenario):
        controller = shielded_controller(policy, scenario, grid_step=GRID_STEP)
        h_rl = predict_harm(policy, scenario)
        h_star = solve(scenario, GRID_STEP).h_star
        executed = _executed_harm(scenario, controller)
        assert executed == min(h_rl, h_star)
        assert executed <= h_star


def test_squashed_policy_is_shielded_too(tight_scenario):
    policy = constant_policy(0.9, squash=True)
    controller = shielded_controller(policy, tight_scenario, grid_step=GRID_STEP)
    executed = _executed_harm(tight_scenario, controller)
    assert executed == min(predict_harm(policy, tight_scenario), solve(tight_scenario, GRID_STEP).h_star)
