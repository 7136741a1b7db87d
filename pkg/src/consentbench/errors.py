"""Exception hierarchy shared by every module of the package."""


class ConsentBenchError(Exception):
    pass


class ValidationError(ConsentBenchError, ValueError):
    """Input is well-formed but violates a model rule."""


class UnknownClass(ValidationError):
    pass


class CategoryMismatch(ValidationError):
    pass


class CycleDetected(ValidationError):
    pass


class UnknownParent(ValidationError):
    pass


class DuplicateClass(ValidationError):
    pass


class EmptyUnion(ValidationError):
    pass


class BadInterval(ValidationError):
    pass


class BadDuration(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class ParseError(ConsentBenchError, ValueError):
    """Syntax error; ``line`` for taxonomy files, ``offset`` (bytes) for JSON."""

    def __init__(self, message, *, line=None, offset=None):
        self.line = line
        self.offset = offset
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif offset is not None:
            where = f"byte {offset}: "
        super().__init__(where + message)


class UniverseTooLarge(ConsentBenchError):
    pass


class EmptyInput(ConsentBenchError, ValueError):
    pass


class GenerationStuck(ConsentBenchError):
    pass


# broker
class BrokerError(ConsentBenchError):
    pass


class DuplicateTopic(BrokerError):
    pass


class UnknownTopic(BrokerError):
    pass


class BadPartitionCount(BrokerError, ValueError):
    pass


class UnknownMember(BrokerError):
    pass


class NotAssigned(BrokerError):
    pass


class RewindRejected(BrokerError):
    pass
