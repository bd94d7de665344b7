"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, NumericsError -> 3,
OS/IO errors -> 4.
"""


class MomcError(Exception):
    pass


class ConfigError(MomcError):
    """Bad or inconsistent experiment configuration."""


class GridMismatchError(MomcError):
    """Operands live on different grids or have different variable counts."""


class StencilError(MomcError):
    """A stencil requested more ghost support than the mesh provides."""


class DegenerateInputError(MomcError):
    """A random input landed on a degenerate point of the initial data."""


class NumericsError(MomcError):
    """Base for runtime numerical failures."""


class PositivityError(NumericsError):
    """A state violated a model positivity requirement (h > 0, A > 0, ...)."""


class BlowUpError(NumericsError):
    """Nonfinite values appeared during time marching."""


class StaleReferenceError(MomcError):
    """A persisted reference solution does not match the current config."""
