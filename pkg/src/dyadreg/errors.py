"""Exception hierarchy.

Three families, mirrored by the CLI exit codes:

* ``DataError``      -- malformed or inconsistent input data (exit 3)
* ``NumericFailure`` -- an estimator is undefined at the requested point (exit 4)
* ``QueryError``     -- a well-formed panel but an invalid request (exit 2)
"""


class DyadError(Exception):
    """Base class for every error raised by this package."""


class DataError(DyadError, ValueError):
    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class DuplicateDyad(DataError):
    pass


class SelfLoop(DataError):
    pass


class UnknownAgent(DataError):
    pass


class QueryError(DyadError, ValueError):
    pass


class BadRange(QueryError):
    pass


class BadProbability(QueryError):
    pass


class SignMismatch(QueryError):
    """Homogeneous normalization queried with ``e / ebar <= 0``."""


class NumericFailure(DyadError, ArithmeticError):
    pass


class NoLocalMass(NumericFailure):
    """All kernel weights vanish at the conditioning point."""


class BracketFailure(NumericFailure):
    pass


class DegenerateDensity(NumericFailure):
    pass


class Singularity(NumericFailure):
    pass
