from typing import Any, Optional


class RnifsError(Exception):
    """
    Base error. Carries a readable detail and the CLI exit code it maps to.
    """
    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class UnknownMap(RnifsError):
    def __init__(self, map_id: str):
        super().__init__(f"Unknown map '{map_id}'")
        self.map_id = map_id


class InvalidProbabilities(RnifsError):
    pass


class LengthMismatch(RnifsError):
    pass


class InvalidAlphas(RnifsError):
    pass


class InvalidCap(RnifsError):
    pass


class SupportTooLarge(RnifsError):
    pass


class EmptyCloud(RnifsError):
    def __init__(self, detail: str = "Point cloud is empty"):
        super().__init__(detail)


class InsufficientScales(RnifsError):
    pass


class DomainError(RnifsError):
    pass


class ConfigParseError(RnifsError):
    def __init__(self, path: str, message: str, lineno: int, colno: int):
        super().__init__(f"{path}:{lineno}:{colno}: {message}")
        self.lineno = lineno
        self.colno = colno


class ConfigValidationError(RnifsError):
    pass


class NonFiniteResult(RnifsError):
    exit_code = 2


class Diverged(RnifsError):
    exit_code = 2

    def __init__(self, step: int, point: tuple[float, float], config: Optional[str] = None):
        where = f" in '{config}'" if config else ""
        super().__init__(f"Orbit diverged{where} at step {step}: point {point} left the bounded region")
        self.step = step
        self.point = point
        self.config = config


class LogOfZero(RnifsError):
    exit_code = 2

    def __init__(self, step: int):
        super().__init__(f"Singular Jacobian at step {step}")
        self.step = step


class NoConvergence(RnifsError):
    exit_code = 2

    def __init__(self, max_steps: int, trace: Any):
        super().__init__(f"No convergence within {max_steps} steps")
        self.max_steps = max_steps
        self.trace = trace


class ArtifactIOError(RnifsError):
    exit_code = 3

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
