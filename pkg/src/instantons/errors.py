"""Exception hierarchy. The CLI maps each class to an exit code."""


class InstantonError(Exception):
    exit_code = 4


class InvalidParameterError(InstantonError, ValueError):
    exit_code = 1


class SingularPointError(InstantonError):
    """Evaluation (or a finite-difference stencil) touches a declared singular point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class NonRegularDataError(InstantonError):
    exit_code = 2


class FrameJumpError(InstantonError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class NonConvergenceError(InstantonError):
    def __init__(self, message, final_value=None, iterations=None):
        super().__init__(message)
        self.final_value = final_value
        self.iterations = iterations


class PoleEncounteredError(InstantonError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class TailFitError(InstantonError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class EigenspaceBreakdownError(InstantonError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ToleranceNotMetError(InstantonError):
    exit_code = 3
