"""Exception hierarchy shared across the package.

Each error carries the process exit code the CLI maps it to.
"""


class MuskatError(Exception):
    exit_code = 1


class ConfigError(MuskatError):
    exit_code = 2


class GeometryError(MuskatError):
    """Inadmissible geometry: chord-arc violation, tangent degeneracy, ..."""

    exit_code = 3


class SingularityError(GeometryError):
    """Evaluation too close to a singular point of the conformal map."""

    exit_code = 3


class ConvergenceError(MuskatError):
    """Iterative solver failed to reach its tolerance."""

    exit_code = 4


class StiffnessError(MuskatError):
    """Adaptive time step underflowed dt_min."""

    exit_code = 5


class OutputError(MuskatError):
    exit_code = 6
