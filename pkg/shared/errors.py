# Domain exceptions; exit_code is what the CLI returns when one escapes.


class ExoKneeError(Exception):
    """Base class for every failure the toolkit reports"""
    exit_code = 2


class ConfigError(ExoKneeError):
    exit_code = 1


class InvalidBounds(ConfigError):
    """Lower/upper variable bounds are not positive with lower < upper"""


class GeometryInfeasible(ExoKneeError):
    """A triangle of the knee linkage cannot close"""

    def __init__(self, triangle: str, argument: float):
        self.triangle = triangle
        self.argument = argument
        super().__init__(
            f"triangle ({triangle}) cannot close: acos argument {argument:.12g} outside [-1, 1]"
        )


class TargetOutOfRange(ExoKneeError):
    pass


class InfeasibleStartUnrecoverable(ExoKneeError):
    pass


class MaxIterations(ExoKneeError):
    pass


class NoFeasibleGridPoint(ExoKneeError):
    pass


class MalformedHeader(ExoKneeError):
    pass


class TooFewSamples(ExoKneeError):
    pass


class NonMonotonicTime(ExoKneeError):
    pass


class DegenerateVectors(ExoKneeError):
    pass


class NoOverlap(ExoKneeError):
    pass


class IoError(ExoKneeError):
    exit_code = 3
