"""Exception types shared across the package."""


class EaLabError(Exception):
    """Base class for all package errors."""


# -- graph construction -------------------------------------------------------

class InvalidTopology(EaLabError, ValueError):
    """Cube/torus parameters out of range."""


class TorusTooSmall(InvalidTopology):
    """Torus side below 3 would create multi-edges; rejected."""


class NotSimple(EaLabError, ValueError):
    """Loop or duplicate edge in an explicit graph."""


class Disconnected(EaLabError, ValueError):
    """Graph is not connected."""


class InteriorDisconnected(EaLabError, ValueError):
    """Vertex set minus the boundary is not connected."""


class TooFewEdges(EaLabError, ValueError):
    """Fewer than two edges."""


class EmptyInterior(EaLabError, ValueError):
    """Every vertex lies on the boundary."""


# -- disorder ------------------------------------------------------------------

class LengthMismatch(EaLabError, ValueError):
    """Coupling arrays of different lengths."""


# -- solving -------------------------------------------------------------------

class DimensionMismatch(EaLabError, ValueError):
    """Configuration or coupling length does not match the graph."""


class TooLarge(EaLabError, ValueError):
    """Instance exceeds the enumeration budget."""


class InvalidRestarts(EaLabError, ValueError):
    """Annealer needs at least one restart."""


class InvalidSchedule(EaLabError, ValueError):
    """Annealing schedule must satisfy T_init > T_final > 0 and sweeps >= 1."""


class InfeasibleConstraint(EaLabError, ValueError):
    """Pair constraint contradicts the boundary condition."""


# -- observables ---------------------------------------------------------------

class RegionTouchesBoundary(EaLabError, ValueError):
    """Flip region must stay inside the interior."""


class InternalMismatch(EaLabError, RuntimeError):
    """Two routes to the same quantity disagree; caller passed bad inputs."""


class WrongKind(EaLabError, ValueError):
    """Operation requires the other perturbation kind."""


class NotOpenCube(EaLabError, ValueError):
    """Operation is defined on open cubes only."""


# -- aggregation / config ------------------------------------------------------

class EmptyAggregation(EaLabError, ValueError):
    """No values to aggregate."""


class ParseError(EaLabError, ValueError):
    """Malformed configuration file or value."""


class UnknownKey(ParseError):
    """Configuration file contains a key the schema does not define."""
