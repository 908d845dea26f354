"""Proximal policy optimization: rollout collection, GAE and the clipped update."""
import logging
from typing import Dict, NamedTuple, Optional, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F

from models.trainer import PPOSettings
from services.networks import DTYPE, PolicyNetwork, ValueNetwork
from utils.errors import TrainingError

logger = logging.getLogger(__name__)

Number = Union[float, torch.Tensor]


def gae(
    rewards: np.ndarray,
    values: np.ndarray,
    gamma: float,
    lam: float,
    dones: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Generalized advantage estimates by backward recursion.

    ``values`` holds one more entry than ``rewards`` (the bootstrap value).
    ``dones[n]`` marks that the episode ended after step n, which cuts both
    the bootstrap and the recursion there.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] != rewards.shape[0] + 1:
        raise ValueError(f"values must have {rewards.shape[0] + 1} entries (got {values.shape[0]})")
    if dones is None:
        dones = np.zeros(rewards.shape[0], dtype=bool)
    advantages = np.zeros_like(rewards)
    running = 0.0
    for n in reversed(range(rewards.shape[0])):
        nonterminal = 0.0 if dones[n] else 1.0
        delta = rewards[n] + gamma * values[n + 1] * nonterminal - values[n]
        running = delta + gamma * lam * nonterminal * running
        advantages[n] = running
    return advantages


def ppo_surrogate(logp_new: Number, logp_old: Number, advantage: Number, epsilon: float) -> torch.Tensor:
    """min(rho * A, clip(rho, 1 - eps, 1 + eps) * A), elementwise."""
    logp_new, logp_old, advantage = (torch.as_tensor(value, dtype=DTYPE) for value in (logp_new, logp_old, advantage))
    ratio = torch.exp(logp_new - logp_old)
    return torch.min(ratio * advantage, torch.clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage)


class _RolloutFields(NamedTuple):
    obs: torch.Tensor
    actions: torch.Tensor
    logp_old: torch.Tensor
    returns: torch.Tensor  # value targets
    advantages: torch.Tensor


class RolloutBatch(_RolloutFields):
    __slots__ = ()

    @classmethod
    def _make(cls, iterable) -> "RolloutBatch":
        # namedtuple's _make checks arity with len(), which __len__ below redefines.
        result = tuple.__new__(cls, iterable)
        if tuple.__len__(result) != len(cls._fields):
            raise TypeError(f"Expected {len(cls._fields)} arguments, got {tuple.__len__(result)}")
        return result

    def __len__(self) -> int:
        return self.obs.shape[0]

    def subset(self, index: torch.Tensor) -> "RolloutBatch":
        return RolloutBatch(*(field[index] for field in self))


def ppo_loss(
    batch: RolloutBatch,
    policy: PolicyNetwork,
    value: ValueNetwork,
    config: PPOSettings,
) -> Tuple[torch.Tensor, Dict[str, float]]:
    """-(L_clip - c1 * value MSE + c2 * entropy) on one minibatch."""
    logp = policy.log_prob(batch.obs, batch.actions)
    clip_objective = ppo_surrogate(logp, batch.logp_old, batch.advantages, config.clip_range).mean()
    value_loss = F.mse_loss(value(batch.obs), batch.returns)
    entropy = policy.entropy(batch.obs).mean()
    loss = -(clip_objective - config.vf_coef * value_loss + config.ent_coef * entropy)
    return loss, {
        "policy_objective": float(clip_objective.detach()),
        "value_loss": float(value_loss.detach()),
        "entropy": float(entropy.detach()),
    }


def approx_kl(batch: RolloutBatch, policy: PolicyNetwork) -> float:
    with torch.no_grad():
        log_ratio = policy.log_prob(batch.obs, batch.actions) - batch.logp_old
        return float(((torch.exp(log_ratio) - 1.0) - log_ratio).mean())


def ppo_update(
    batch: RolloutBatch,
    policy: PolicyNetwork,
    value: ValueNetwork,
    optimizer: torch.optim.Optimizer,
    config: PPOSettings,
    rng: np.random.Generator,
    iteration: int = 0,
) -> Dict[str, float]:
    if config.normalize_advantages and len(batch) > 1:
        advantages = batch.advantages
        batch = batch._replace(advantages=(advantages - advantages.mean()) / (advantages.std() + 1e-8))

    parameters = [*policy.parameters(), *value.parameters()]
    stats: Dict[str, float] = {"epochs": 0, "early_stop": False, "approx_kl": 0.0}
    for epoch in range(config.n_epochs):
        order = torch.as_tensor(rng.permutation(len(batch)))
        for start in range(0, len(batch), config.batch_size):
            minibatch = batch.subset(order[start:start + config.batch_size])
            loss, terms = ppo_loss(minibatch, policy, value, config)
            if not torch.isfinite(loss):
                logger.error(f"Non-finite PPO loss at iteration {iteration}, epoch {epoch}")
                raise TrainingError("non-finite PPO loss", iteration)
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(parameters, config.max_grad_norm)
            optimizer.step()
            stats.update(terms, loss=float(loss.detach()))
        stats["epochs"] = epoch + 1
        stats["approx_kl"] = approx_kl(batch, policy)
        if config.target_kl is not None and stats["approx_kl"] > config.target_kl:
            stats["early_stop"] = True
            logger.debug(f"PPO iteration {iteration}: KL {stats['approx_kl']:.4f} after epoch {epoch + 1}, stopping")
            break
    return stats


def collect_rollout(env, policy: PolicyNetwork, value: ValueNetwork, obs: np.ndarray, n_steps: int, gamma: float, lam: float):
    """Run the stochastic policy for ``n_steps`` env steps (crossing episodes).

    Returns the training batch, the observation to continue from and the
    undiscounted returns of the episodes finished along the way.
    """
    obs_buf = np.zeros((n_steps, env.observation_space.shape[0]))
    act_buf = np.zeros((n_steps, env.action_space.shape[0]))
    logp_buf = np.zeros(n_steps)
    rew_buf = np.zeros(n_steps)
    val_buf = np.zeros(n_steps + 1)
    done_buf = np.zeros(n_steps, dtype=bool)
    finished = []
    episode_return = 0.0

    for n in range(n_steps):
        with torch.no_grad():
            obs_tensor = torch.as_tensor(obs, dtype=DTYPE)
            action, logp = policy.sample(obs_tensor)
            val_buf[n] = float(value(obs_tensor))
        obs_buf[n] = obs
        act_buf[n] = action.numpy()
        logp_buf[n] = float(logp)
        obs, reward, terminated, truncated, _ = env.step(act_buf[n])
        rew_buf[n] = reward
        episode_return += reward
        if terminated or truncated:
            done_buf[n] = True
            finished.append(episode_return)
            episode_return = 0.0
            obs, _ = env.reset()

    with torch.no_grad():
        val_buf[n_steps] = float(value(torch.as_tensor(obs, dtype=DTYPE)))
    advantages = gae(rew_buf, val_buf, gamma, lam, done_buf)
    returns = advantages + val_buf[:-1]
    batch = RolloutBatch(
        obs=torch.as_tensor(obs_buf, dtype=DTYPE),
        actions=torch.as_tensor(act_buf, dtype=DTYPE),
        logp_old=torch.as_tensor(logp_buf, dtype=DTYPE),
        returns=torch.as_tensor(returns, dtype=DTYPE),
        advantages=torch.as_tensor(advantages, dtype=DTYPE),
    )
    return batch, obs, finished
