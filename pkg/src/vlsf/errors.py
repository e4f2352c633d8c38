"""Semantic exceptions shared across the package."""


class InfeasibleError(RuntimeError):
    """No decoding-time assignment satisfies the constraints."""


class ConditionError(RuntimeError):
    """A solver's validity hypothesis failed; the message names the condition."""


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested accuracy."""
