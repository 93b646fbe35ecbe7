"""Exception types shared across the package.

The CLI maps ValidationError to exit code 2 and the runtime errors to
exit code 3; library code raises these instead of bare exceptions so
callers can tell bad input from numerical trouble.
"""


class ValidationError(ValueError):
    """Malformed or out-of-domain input (data files, parameters, configs)."""


class NumericalError(RuntimeError):
    """A computation produced a non-finite or otherwise unusable result."""


class EstimationError(RuntimeError):
    """An estimation procedure could not produce a result (too few events,
    optimizer/sampler failure)."""
