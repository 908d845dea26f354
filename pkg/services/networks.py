"""Small MLP approximators shared by the PPO and SAC learners.

Everything runs in float64 on the CPU. Every network evaluates its layers
through ``mlp_forward`` so the functional form can be checked in isolation.
"""
import copy
import math
from typing import Any, Dict, List, Sequence, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.distributions import Normal

DTYPE = torch.float64
LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0

POLICY_HIDDEN = (256, 256)
VALUE_HIDDEN = (256, 256, 128)
Q_HIDDEN = (256, 256)

Params = Sequence[Tuple[torch.Tensor, torch.Tensor]]


def mlp_forward(params: Params, x: torch.Tensor) -> torch.Tensor:
    """Affine layers with ReLU between them (none after the last)."""
    if not params:
        raise ValueError("mlp_forward needs at least one layer")
    expected = params[0][0].shape[1]
    if x.shape[-1] != expected:
        raise ValueError(f"input dimension {x.shape[-1]} does not match first layer ({expected})")
    h = x
    last = len(params) - 1
    for index, (weight, bias) in enumerate(params):
        h = F.linear(h, weight, bias)
        if index < last:
            h = torch.relu(h)
    return h


class MLP(nn.Module):
    def __init__(self, sizes: Sequence[int], output_gain: float = 1.0):
        super().__init__()
        self.sizes = tuple(sizes)
        self.layers = nn.ModuleList(
            nn.Linear(fan_in, fan_out, dtype=DTYPE) for fan_in, fan_out in zip(sizes[:-1], sizes[1:])
        )
        last = len(self.layers) - 1
        for index, layer in enumerate(self.layers):
            nn.init.orthogonal_(layer.weight, gain=output_gain if index == last else math.sqrt(2))
            nn.init.zeros_(layer.bias)

    def params(self) -> List[Tuple[torch.Tensor, torch.Tensor]]:
        return [(layer.weight, layer.bias) for layer in self.layers]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return mlp_forward(self.params(), x)


class PolicyNetwork(nn.Module):
    """Gaussian policy with a state-independent log standard deviation.

    With ``squash`` the sample is passed through tanh (SAC); otherwise the
    raw Gaussian sample is the action and the environment clips it (PPO).
    """

    def __init__(self, obs_dim: int, action_dim: int = 1, hidden: Sequence[int] = POLICY_HIDDEN, squash: bool = False):
        super().__init__()
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.hidden = tuple(hidden)
        self.squash = squash
        self.body = MLP([obs_dim, *hidden, action_dim], output_gain=0.01)
        self.log_std = nn.Parameter(torch.zeros(action_dim, dtype=DTYPE))

    def architecture(self) -> Dict[str, Any]:
        return {
            "obs_dim": self.obs_dim,
            "action_dim": self.action_dim,
            "hidden": list(self.hidden),
            "squash": self.squash,
        }

    def forward(self, obs: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """Gaussian head: (mean, clamped log-std) of the pre-squash action."""
        mean = self.body(obs)
        return mean, self.log_std.clamp(LOG_STD_MIN, LOG_STD_MAX).expand_as(mean)

    def distribution(self, obs: torch.Tensor) -> Normal:
        mean, log_std = self(obs)
        return Normal(mean, log_std.exp())

    def mean_action(self, obs: torch.Tensor) -> torch.Tensor:
        mean = self.body(obs)
        return torch.tanh(mean) if self.squash else mean.clamp(-1.0, 1.0)

    def sample(self, obs: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        """Reparameterized action and its log-probability (summed over action dims)."""
        dist = self.distribution(obs)
        pre_tanh = dist.rsample()
        log_prob = dist.log_prob(pre_tanh).sum(-1)
        if not self.squash:
            return pre_tanh, log_prob
        action = torch.tanh(pre_tanh)
        # change of variables; softplus form is stable for large |pre_tanh|
        log_prob = log_prob - (2.0 * (math.log(2.0) - pre_tanh - F.softplus(-2.0 * pre_tanh))).sum(-1)
        return action, log_prob

    def log_prob(self, obs: torch.Tensor, action: torch.Tensor) -> torch.Tensor:
        return self.distribution(obs).log_prob(action).sum(-1)

    def entropy(self, obs: torch.Tensor) -> torch.Tensor:
        return self.distribution(obs).entropy().sum(-1)


class ValueNetwork(nn.Module):
    def __init__(self, obs_dim: int, hidden: Sequence[int] = VALUE_HIDDEN):
        super().__init__()
        self.body = MLP([obs_dim, *hidden, 1])

    def forward(self, obs: torch.Tensor) -> torch.Tensor:
        return self.body(obs).squeeze(-1)


class QNetwork(nn.Module):
    def __init__(self, obs_dim: int, action_dim: int = 1, hidden: Sequence[int] = Q_HIDDEN):
        super().__init__()
        self.body = MLP([obs_dim + action_dim, *hidden, 1])

    def forward(self, obs: torch.Tensor, action: torch.Tensor) -> torch.Tensor:
        return self.body(torch.cat([obs, action], dim=-1)).squeeze(-1)


class TwinQNetwork(nn.Module):
    """Two independently initialized critics plus frozen target copies."""

    def __init__(self, obs_dim: int, action_dim: int = 1, hidden: Sequence[int] = Q_HIDDEN):
        super().__init__()
        self.q1 = QNetwork(obs_dim, action_dim, hidden)
        self.q2 = QNetwork(obs_dim, action_dim, hidden)
        self.target_q1 = copy.deepcopy(self.q1)
        self.target_q2 = copy.deepcopy(self.q2)
        for parameter in (*self.target_q1.parameters(), *self.target_q2.parameters()):
            parameter.requires_grad_(False)

    def critic_parameters(self) -> List[nn.Parameter]:
        return [*self.q1.parameters(), *self.q2.parameters()]

    def forward(self, obs: torch.Tensor, action: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        return self.q1(obs, action), self.q2(obs, action)

    def min_q(self, obs: torch.Tensor, action: torch.Tensor) -> torch.Tensor:
        q1, q2 = self(obs, action)
        return torch.min(q1, q2)

    def target_min_q(self, obs: torch.Tensor, action: torch.Tensor) -> torch.Tensor:
        return torch.min(self.target_q1(obs, action), self.target_q2(obs, action))


def build_policy(architecture: Dict[str, Any]) -> PolicyNetwork:
    return PolicyNetwork(
        obs_dim=int(architecture["obs_dim"]),
        action_dim=int(architecture["action_dim"]),
        hidden=tuple(int(width) for width in architecture["hidden"]),
        squash=bool(architecture["squash"]),
    )
