"""Exception hierarchy shared across the package."""


class NeurosyntaxError(Exception):
    """Base class for all package errors."""


# syntax
class MergeError(NeurosyntaxError):
    pass


class UnlabelableError(NeurosyntaxError):
    pass


class OrderMismatchError(NeurosyntaxError):
    pass


# signals / spiking
class NyquistError(NeurosyntaxError):
    pass


class UnknownCategoryError(NeurosyntaxError, KeyError):
    pass


class StepSizeError(NeurosyntaxError):
    pass


class EmptyInputError(NeurosyntaxError, ValueError):
    pass


class ThinnessError(NeurosyntaxError):
    pass


# lexicon
class DimensionError(NeurosyntaxError, ValueError):
    pass


class DegenerateWeightsError(NeurosyntaxError, ValueError):
    pass


# hopf
class NoDecompositionError(NeurosyntaxError):
    pass


# codec
class TooShortError(NeurosyntaxError, ValueError):
    pass


class DecodeError(NeurosyntaxError):
    pass


class AmbiguousDecodeError(DecodeError):
    pass


class UnlabeledTreeError(NeurosyntaxError):
    pass


class UnknownLeafError(NeurosyntaxError, KeyError):
    pass


class InsufficientDataError(NeurosyntaxError, ValueError):
    pass


# simulation
class ScheduleError(NeurosyntaxError):
    pass
