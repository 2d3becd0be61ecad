"""Exception hierarchy shared by the whole package.

Input-validation problems derive from :class:`InputError`; failures of
internal numerical machinery derive from :class:`ComputationError`.  The CLI
maps the former to exit code 1 and the latter to exit code 2.
"""


class SmoothbenchError(Exception):
    """Base class for all package-specific errors."""


class InputError(SmoothbenchError):
    """Invalid user-supplied data or parameters."""


class ComputationError(SmoothbenchError):
    """A numerical procedure could not complete."""


# -- time series ------------------------------------------------------------

class EmptyInput(InputError):
    pass


class DuplicateTimestamp(InputError):
    pass


class InsufficientData(InputError):
    pass


# -- normalization ----------------------------------------------------------

class NonPositivePopulation(InputError):
    pass


class NonPositiveBiomarkerLoad(InputError):
    pass


class MisalignedSeries(InputError):
    pass


class ZeroBiomarkerConcentration(InputError):
    pass


class MissingBiomarker(InputError):
    pass


# -- smoothing --------------------------------------------------------------

class InvalidParams(InputError):
    pass


class SeriesTooShort(InputError):
    pass


class DegenerateLikelihood(ComputationError):
    pass


# -- calibration ------------------------------------------------------------

class NonParametricMethod(InputError):
    pass


class EvaluationFailure(ComputationError):
    pass


# -- clustering -------------------------------------------------------------

class TooFewPoints(InputError):
    pass


# -- regression -------------------------------------------------------------

class DegenerateDesign(InputError):
    pass


# -- I/O --------------------------------------------------------------------

class SchemaError(InputError):
    pass


class ParseError(InputError):
    pass


class IoError(SmoothbenchError):
    pass
