from typing import List, Optional


class BrakingLabError(Exception):
    """Base class for every error the lab raises on purpose."""


class ConfigError(BrakingLabError):
    """Invalid configuration; carries one diagnostic per violated field."""

    def __init__(self, issues: List[str], source: Optional[str] = None):
        self.issues = list(issues)
        self.source = source
        where = f" in {source}" if source else ""
        super().__init__(f"invalid configuration{where}: " + "; ".join(self.issues))


class ContractViolation(BrakingLabError):
    """A caller broke an operation's precondition."""


class TrainingError(BrakingLabError):
    def __init__(self, message: str, iteration: int):
        self.iteration = iteration
        super().__init__(f"training failed at iteration {iteration}: {message}")


class CheckpointError(BrakingLabError):
    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"cannot read checkpoint {path}: {reason}")
