"""Training loops for the two learners and their learning curves."""
import logging
import math
from typing import Callable, Iterable, List, Tuple

import numpy as np
import pandas as pd
import torch

from models.trainer import TrainerConfig
from services.environment import BrakingEnv
from services.networks import DTYPE, PolicyNetwork, ValueNetwork
from services.ppo import collect_rollout, ppo_update
from services.sac import ReplayBuffer, SACAgent, sac_update
from utils.errors import TrainingError
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["iteration", "env_steps", "mean_return", "std_return"]

EnvFactory = Callable[[], BrakingEnv]


def cosine_lr(base: float, progress: float) -> float:
    """Cosine decay from ``base`` at progress 0 to 0 at progress 1."""
    progress = min(1.0, max(0.0, progress))
    return base * 0.5 * (1.0 + math.cos(math.pi * progress))


def _set_lr(optimizers: Iterable[torch.optim.Optimizer], config: TrainerConfig, steps_done: int) -> None:
    if config.lr_schedule == "constant":
        return
    lr = cosine_lr(config.learning_rate, steps_done / max(1, config.total_steps))
    for optimizer in optimizers:
        for group in optimizer.param_groups:
            group["lr"] = lr


def evaluate_return(policy: PolicyNetwork, env: BrakingEnv, seeds: List[int]) -> Tuple[float, float]:
    """Mean and std of undiscounted returns of the deterministic (mean-action) policy."""
    returns = []
    for seed in seeds:
        obs, _ = env.reset(seed=seed)
        total = 0.0
        done = False
        while not done:
            with torch.no_grad():
                action = policy.mean_action(torch.as_tensor(obs, dtype=DTYPE)).numpy()
            obs, reward, terminated, truncated, _ = env.step(action)
            total += reward
            done = terminated or truncated
        returns.append(total)
    return float(np.mean(returns)), float(np.std(returns))


def _curve_row(iteration: int, env_steps: int, policy: PolicyNetwork, env: BrakingEnv, seeds: List[int]) -> dict:
    mean_return, std_return = evaluate_return(policy, env, seeds)
    return {"iteration": iteration, "env_steps": env_steps, "mean_return": mean_return, "std_return": std_return}


def _train_ppo(env: BrakingEnv, eval_env: BrakingEnv, config: TrainerConfig, seed: int, eval_seeds: List[int]):
    ppo = config.ppo
    obs_dim = env.observation_space.shape[0]
    policy = PolicyNetwork(obs_dim, env.action_space.shape[0], squash=False)
    value = ValueNetwork(obs_dim)
    optimizer = torch.optim.Adam([*policy.parameters(), *value.parameters()], lr=config.learning_rate)
    rng = np.random.default_rng(derive_seed(seed, 2))

    rows = []
    obs, _ = env.reset(seed=seed)
    steps_done = 0
    iteration = 0
    while steps_done < config.total_steps:
        n_steps = min(ppo.n_steps, config.total_steps - steps_done)
        _set_lr([optimizer], config, steps_done)
        batch, obs, _ = collect_rollout(env, policy, value, obs, n_steps, config.gamma, ppo.gae_lambda)
        stats = ppo_update(batch, policy, value, optimizer, ppo, rng, iteration=iteration)
        steps_done += n_steps
        rows.append(_curve_row(iteration, steps_done, policy, eval_env, eval_seeds))
        logger.info(
            f"PPO iteration {iteration}: steps={steps_done} return={rows[-1]['mean_return']:.3f} "
            f"kl={stats['approx_kl']:.4f} epochs={stats['epochs']}"
        )
        iteration += 1
    return policy, rows


def _train_sac(env: BrakingEnv, eval_env: BrakingEnv, config: TrainerConfig, seed: int, eval_seeds: List[int]):
    sac = config.sac
    obs_dim = env.observation_space.shape[0]
    action_dim = env.action_space.shape[0]
    agent = SACAgent(obs_dim, action_dim, sac, config.learning_rate)
    buffer = ReplayBuffer(min(sac.buffer_size, max(1, config.total_steps)), obs_dim, action_dim)
    rng = np.random.default_rng(derive_seed(seed, 2))

    rows = []
    obs, _ = env.reset(seed=seed)
    iteration = 0
    for step in range(config.total_steps):
        if step < sac.learning_starts:
            action = rng.uniform(-1.0, 1.0, size=action_dim)
        else:
            with torch.no_grad():
                action = agent.policy.sample(torch.as_tensor(obs, dtype=DTYPE))[0].numpy()
        next_obs, reward, terminated, truncated, _ = env.step(action)
        # truncation at the horizon is an episode end too; no bootstrap past it
        buffer.add(obs, action, reward, next_obs, terminated or truncated)
        obs = env.reset()[0] if terminated or truncated else next_obs

        if step >= sac.learning_starts and step % sac.train_freq == 0:
            _set_lr(agent.optimizers(), config, step)
            for _ in range(sac.gradient_steps):
                sac_update(buffer.sample(sac.batch_size, rng), agent, config.gamma, iteration=step)

        if (step + 1) % config.eval_interval == 0 or step + 1 == config.total_steps:
            rows.append(_curve_row(iteration, step + 1, agent.policy, eval_env, eval_seeds))
            logger.info(
                f"SAC iteration {iteration}: steps={step + 1} return={rows[-1]['mean_return']:.3f} "
                f"alpha={agent.alpha:.4f}"
            )
            iteration += 1
    return agent.policy, rows


def train(
    algorithm: str,
    env_factory: EnvFactory,
    config: TrainerConfig,
    seed: int,
) -> Tuple[PolicyNetwork, pd.DataFrame]:
    """Train a policy; returns it with the learning curve (one row per iteration)."""
    torch.manual_seed(seed)
    env = env_factory()
    eval_env = env_factory()
    eval_seeds = [derive_seed(seed, 1, episode) for episode in range(config.eval_episodes)]
    obs_dim = env.observation_space.shape[0]
    action_dim = env.action_space.shape[0]

    if config.total_steps == 0:
        logger.info(f"No training budget for {algorithm}; returning the initial policy")
        return PolicyNetwork(obs_dim, action_dim, squash=algorithm == "sac"), pd.DataFrame(columns=CURVE_COLUMNS)

    logger.info(f"Training {algorithm.upper()} for {config.total_steps} steps (seed {seed})")
    try:
        if algorithm == "ppo":
            policy, rows = _train_ppo(env, eval_env, config, seed, eval_seeds)
        elif algorithm == "sac":
            policy, rows = _train_sac(env, eval_env, config, seed, eval_seeds)
        else:
            raise ValueError(f"unknown algorithm '{algorithm}'")
    except TrainingError:
        logger.error(f"{algorithm.upper()} training aborted")
        raise
    return policy, pd.DataFrame(rows, columns=CURVE_COLUMNS)
