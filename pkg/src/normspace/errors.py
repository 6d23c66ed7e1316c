"""Exception types shared by every module.

``PreconditionError`` covers any violated operation precondition; the CLI maps
it to exit code 3. ``MalformedInputError`` is raised by the JSON decoders and
maps to exit code 2.
"""


class NormspaceError(Exception):
    pass


class PreconditionError(NormspaceError, ValueError):
    pass


class SingularMatrixError(PreconditionError):
    pass


class UnsupportedPlaceError(PreconditionError):
    pass


class NotANormError(PreconditionError):
    pass


class MalformedInputError(NormspaceError, ValueError):
    pass
