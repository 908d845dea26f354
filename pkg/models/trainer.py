from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class PPOSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_steps: int = Field(2048, ge=1)
    n_epochs: int = Field(4, ge=1)
    batch_size: int = Field(512, ge=1)
    clip_range: float = Field(0.15, gt=0)
    gae_lambda: float = Field(0.95, ge=0, le=1)
    vf_coef: float = Field(0.5, ge=0)  # c1
    ent_coef: float = Field(0.005, ge=0)  # c2
    target_kl: Optional[float] = Field(0.15, gt=0)
    max_grad_norm: float = Field(0.3, gt=0)
    normalize_advantages: bool = True


class SACSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    batch_size: int = Field(256, ge=1)
    buffer_size: int = Field(1_000_000, ge=1)
    learning_starts: int = Field(10_000, ge=0)
    tau: float = Field(0.02, gt=0, le=1)  # target smoothing
    train_freq: int = Field(1, ge=1)
    gradient_steps: int = Field(1, ge=1)
    alpha_auto: bool = True
    alpha_init: float = Field(1.0, gt=0)
    target_update_interval: int = Field(1, ge=1)
    target_entropy: float = -1.0  # -action_dim


class TrainerConfig(BaseModel):
    """Learner hyperparameters; defaults reproduce the published table."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    algorithm: Literal["ppo", "sac"] = "ppo"
    total_steps: int = Field(500_000, ge=0)
    gamma: float = Field(0.99, ge=0, le=1)
    learning_rate: float = Field(3e-4, gt=0)
    lr_schedule: Literal["cosine", "constant"] = "cosine"
    eval_interval: int = Field(2048, ge=1)  # env steps per curve point (SAC)
    eval_episodes: int = Field(10, ge=1)
    ppo: PPOSettings = PPOSettings()
    sac: SACSettings = SACSettings()
