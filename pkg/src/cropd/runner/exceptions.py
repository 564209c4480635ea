from typing import Optional

from cropd.exceptions import CropdError


class RunnerError(CropdError):
    """Base exception for experiment-runner errors"""

    pass


class ConfigError(RunnerError):
    """Raised when a configuration file or override is invalid"""

    def __init__(self, message: str, field_path: Optional[str] = None) -> None:
        super().__init__(message)
        self.field_path = field_path


class StageError(RunnerError):
    """Raised when a pipeline stage fails; carries the stage name"""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"Stage '{stage}' failed: {message}")
        self.stage = stage


class ReportError(RunnerError):
    """Raised when a report cannot be produced"""

    pass
