"""Reading configuration files and writing run artifacts."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, TypeVar

import pandas as pd
import torch
from pydantic import BaseModel, ValidationError

from models.manifest import RunManifest
from models.scenario import ScenarioConfig, default_scenario, validate
from services.networks import PolicyNetwork, build_policy
from utils.errors import CheckpointError, ConfigError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1

ModelT = TypeVar("ModelT", bound=BaseModel)


def read_json(path: str) -> Dict[str, Any]:
    file = Path(path)
    if not file.is_file():
        raise ConfigError([f"config not found: {path}"], source=path)
    try:
        data = json.loads(file.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"], source=path) from exc
    if not isinstance(data, dict):
        raise ConfigError(["top level must be an object"], source=path)
    return data


def _issues(exc: ValidationError) -> list:
    return [f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()]


def load_model(path: Optional[str], model: Type[ModelT], overrides: Optional[Dict[str, Any]] = None) -> ModelT:
    """Model defaults < file < overrides."""
    data = read_json(path) if path else {}
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_issues(exc), source=path) from exc


def load_scenario(path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """Scenario file fields over the default scenario; every violation is reported at once."""
    data = default_scenario().model_dump()
    if path:
        data.update(read_json(path))
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})
    issues = validate(data)
    if issues:
        raise ConfigError(issues, source=path)
    return ScenarioConfig.model_validate(data)


def ensure_dir(path: str) -> Path:
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format="%.10g")
    logger.info(f"Wrote {path}")
    return path


def write_manifest(manifest: RunManifest, directory: Path) -> Path:
    path = directory / "manifest.json"
    path.write_text(manifest.model_dump_json(indent=2))
    return path


def save_checkpoint(policy: PolicyNetwork, algorithm: str, path: Path) -> Path:
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "algorithm": algorithm,
        "architecture": policy.architecture(),
        "parameters": torch.nn.utils.parameters_to_vector(policy.parameters()).detach(),
    }
    torch.save(payload, path)
    logger.info(f"Saved {algorithm} checkpoint to {path}")
    return path


def load_checkpoint(path: str) -> Tuple[str, PolicyNetwork]:
    if not Path(path).is_file():
        raise CheckpointError(path, "file not found")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        logger.error(f"Failed to read checkpoint {path}: {exc}")
        raise CheckpointError(path, str(exc)) from exc
    if not isinstance(payload, dict) or payload.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(path, "unsupported checkpoint format")
    try:
        policy = build_policy(payload["architecture"])
        expected = sum(parameter.numel() for parameter in policy.parameters())
        if payload["parameters"].numel() != expected:
            raise ValueError(f"{payload['parameters'].numel()} parameters, architecture needs {expected}")
        torch.nn.utils.vector_to_parameters(payload["parameters"], policy.parameters())
    except (KeyError, RuntimeError, ValueError) as exc:
        raise CheckpointError(path, f"corrupt checkpoint ({exc})") from exc
    policy.eval()
    return payload["algorithm"], policy
