"""Collision indicator and energy-equivalent harm.

Harm of a pair impact is the squared closing speed split between the two
vehicles by mass: the front vehicle takes m_rear/(m_front+m_rear) of it and
the rear vehicle the remainder, so the two shares always sum to v_rel^2.
"""
from typing import Iterable, Tuple

from models.harm import CountingPolicy, HarmReport
from models.state import CollisionEvent, Pair


def collision_indicator(d: float) -> int:
    return 1 if d <= 0 else 0


def harm_shares(v_rel, m_front, m_rear):
    """Mass-weighted split of v_rel^2; accepts floats or numpy arrays."""
    harm_front = (m_rear / (m_front + m_rear)) * v_rel * v_rel
    harm_rear = (m_front / m_rear) * harm_front
    return harm_front, harm_rear


def pair_harm(d: float, v_rel: float, m_front: float, m_rear: float) -> Tuple[float, float]:
    """Harm charged to (front, rear) vehicle for a pair with gap ``d`` and closing speed ``v_rel``."""
    if not collision_indicator(d):
        return 0.0, 0.0
    harm_front, harm_rear = harm_shares(v_rel, m_front, m_rear)
    return float(harm_front), float(harm_rear)


def step_harm(
    d1: float,
    v_rel_1: float,
    d2: float,
    v_rel_2: float,
    masses: Tuple[float, float, float],
) -> float:
    """Sum of the four per-vehicle harm terms for one simulation step."""
    h1, h2_front = pair_harm(d1, v_rel_1, masses[0], masses[1])
    h2_rear, h3 = pair_harm(d2, v_rel_2, masses[1], masses[2])
    return h1 + h2_front + h2_rear + h3


def accumulate(
    events: Iterable[CollisionEvent],
    policy: CountingPolicy = CountingPolicy.FIRST_PER_PAIR,
) -> HarmReport:
    per_vehicle = [0.0, 0.0, 0.0]
    total = 0.0
    counted = 0
    observed = 0
    seen = set()
    for event in events:
        observed += 1
        if policy == CountingPolicy.FIRST_PER_PAIR and event.pair in seen:
            continue
        seen.add(event.pair)
        counted += 1
        front = 0 if event.pair == Pair.FRONT else 1
        per_vehicle[front] += event.harm_front_vehicle
        per_vehicle[front + 1] += event.harm_rear_vehicle
        # same summation order as the batched sweep in services.baseline
        total += event.harm_front_vehicle + event.harm_rear_vehicle
    return HarmReport(
        per_vehicle=tuple(per_vehicle),
        total=total,
        events_counted=counted,
        events_observed=observed,
    )
