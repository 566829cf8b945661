"""Exception and warning types shared across the pipeline.

Errors fall in three families, which the CLI maps to exit codes:
``InputError`` (bad files, exit 2), ``PreconditionError`` (valid input that
an operation cannot accept, exit 4) and ``AgentFailure`` (exit 3).
"""


class CardioError(Exception):
    """Base class for all pipeline errors."""


class InputError(CardioError):
    """Malformed or unreadable input."""


class PreconditionError(CardioError):
    """An operation was called on data it cannot handle."""


# -- parsing ---------------------------------------------------------------

class ParseError(InputError):
    def __init__(self, message, line=None, offset=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if offset is not None:
            where.append(f"token {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class TokenCountMismatch(ParseError):
    pass


class NonNumericToken(ParseError):
    pass


class TruncatedRecord(ParseError):
    pass


class FieldCountMismatch(ParseError):
    pass


class SchemaError(InputError):
    pass


class RowArity(InputError):
    pass


class ValueOutOfRange(InputError):
    pass


# -- labels and probabilities ---------------------------------------------

class MissingLabel(PreconditionError):
    pass


class LabelOutOfRange(PreconditionError):
    pass


class NoCoverage(PreconditionError):
    """No record has both variables observed."""


class EmptyDistribution(PreconditionError):
    pass


class DegenerateLabels(PreconditionError):
    """Prior entropy is zero, so significance is undefined."""


class EmptyTrainingSet(PreconditionError):
    pass


class UnknownSymptomName(PreconditionError):
    pass


class TooFewRecords(PreconditionError):
    pass


# -- orchestration ---------------------------------------------------------

class DuplicateAgent(CardioError):
    pass


class CyclicDependency(CardioError):
    pass


class WriteOnceViolation(CardioError):
    pass


class AgentFailure(CardioError):
    def __init__(self, agent_id, cause):
        super().__init__(f"agent {agent_id!r} failed: {type(cause).__name__}: {cause}")
        self.agent_id = agent_id
        self.cause = cause


# -- warnings --------------------------------------------------------------

class PncadenMismatch(UserWarning):
    """pncaden disagrees with painloc + painexer + relrest."""


class DegenerateAttribute(UserWarning):
    """Fewer distinct values than requested bins."""


class EmptySelection(UserWarning):
    """No attribute passed the relevance threshold."""


class UnseenBin(UserWarning):
    """A value fell outside the bins seen during training and was clamped."""
