"""Soft actor-critic with twin critics and automatic entropy temperature."""
import logging
import math
from typing import Dict

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from models.trainer import SACSettings
from services.networks import DTYPE, PolicyNetwork, TwinQNetwork
from utils.errors import TrainingError

logger = logging.getLogger(__name__)


class ReplayBuffer:
    """Fixed-capacity ring buffer of transitions."""

    def __init__(self, capacity: int, obs_dim: int, action_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.dones = np.zeros(capacity)
        self.position = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, action, reward: float, next_obs, done: bool) -> None:
        index = self.position
        self.obs[index] = obs
        self.actions[index] = action
        self.rewards[index] = reward
        self.next_obs[index] = next_obs
        self.dones[index] = float(done)
        self.position = (index + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Dict[str, torch.Tensor]:
        index = rng.integers(0, self.size, size=batch_size)
        return {
            name: torch.as_tensor(getattr(self, name)[index], dtype=DTYPE)
            for name in ("obs", "actions", "rewards", "next_obs", "dones")
        }


def polyak_update(source: nn.Module, target: nn.Module, tau: float) -> None:
    """target <- tau * source + (1 - tau) * target."""
    with torch.no_grad():
        for param, target_param in zip(source.parameters(), target.parameters()):
            target_param.mul_(1.0 - tau)
            target_param.add_(param, alpha=tau)


class SACAgent:
    def __init__(self, obs_dim: int, action_dim: int, config: SACSettings, learning_rate: float):
        self.config = config
        self.policy = PolicyNetwork(obs_dim, action_dim, squash=True)
        self.critics = TwinQNetwork(obs_dim, action_dim)
        self.log_alpha = torch.tensor(math.log(config.alpha_init), dtype=DTYPE, requires_grad=config.alpha_auto)
        self.actor_optimizer = torch.optim.Adam(self.policy.parameters(), lr=learning_rate)
        self.critic_optimizer = torch.optim.Adam(self.critics.critic_parameters(), lr=learning_rate)
        self.alpha_optimizer = torch.optim.Adam([self.log_alpha], lr=learning_rate) if config.alpha_auto else None
        self.updates = 0

    @property
    def alpha(self) -> float:
        return float(self.log_alpha.detach().exp())

    def optimizers(self):
        return [opt for opt in (self.actor_optimizer, self.critic_optimizer, self.alpha_optimizer) if opt is not None]


def alpha_loss(log_alpha: torch.Tensor, logp: torch.Tensor, target_entropy: float) -> torch.Tensor:
    return -(log_alpha.exp() * (logp + target_entropy).detach()).mean()


def _check_finite(name: str, loss: torch.Tensor, iteration: int) -> None:
    if not torch.isfinite(loss):
        logger.error(f"Non-finite SAC {name} loss at update {iteration}")
        raise TrainingError(f"non-finite SAC {name} loss", iteration)


def sac_update(batch: Dict[str, torch.Tensor], agent: SACAgent, gamma: float, iteration: int = 0) -> Dict[str, float]:
    config = agent.config
    alpha = agent.log_alpha.detach().exp()

    with torch.no_grad():
        next_action, next_logp = agent.policy.sample(batch["next_obs"])
        next_q = agent.critics.target_min_q(batch["next_obs"], next_action) - alpha * next_logp
        target = batch["rewards"] + gamma * (1.0 - batch["dones"]) * next_q

    q1, q2 = agent.critics(batch["obs"], batch["actions"])
    critic_loss = F.mse_loss(q1, target) + F.mse_loss(q2, target)
    _check_finite("critic", critic_loss, iteration)
    agent.critic_optimizer.zero_grad()
    critic_loss.backward()
    agent.critic_optimizer.step()

    action, logp = agent.policy.sample(batch["obs"])
    actor_loss = (alpha * logp - agent.critics.min_q(batch["obs"], action)).mean()
    _check_finite("actor", actor_loss, iteration)
    # critic gradients from the actor loss are discarded by the next zero_grad
    agent.actor_optimizer.zero_grad()
    actor_loss.backward()
    agent.actor_optimizer.step()

    stats = {
        "critic_loss": float(critic_loss.detach()),
        "actor_loss": float(actor_loss.detach()),
        "entropy": float(-logp.detach().mean()),
    }
    if agent.alpha_optimizer is not None:
        temperature_loss = alpha_loss(agent.log_alpha, logp, config.target_entropy)
        agent.alpha_optimizer.zero_grad()
        temperature_loss.backward()
        agent.alpha_optimizer.step()
        stats["alpha_loss"] = float(temperature_loss.detach())

    agent.updates += 1
    if agent.updates % config.target_update_interval == 0:
        polyak_update(agent.critics.q1, agent.critics.target_q1, config.tau)
        polyak_update(agent.critics.q2, agent.critics.target_q2, config.tau)
    stats["alpha"] = agent.alpha
    return stats
