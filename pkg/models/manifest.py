from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    command: str
    argv: List[str]
    config_paths: Dict[str, Optional[str]] = Field(default_factory=dict)
    resolved_config: Dict[str, Any] = Field(default_factory=dict)
    seed: int
    tool_version: str
    output_dir: str
    started_at: str
    wall_clock_seconds: float = 0.0
    outputs: List[str] = Field(default_factory=list)
