"""Exception types shared across the toolkit."""


class SankitError(Exception):
    """Base class for all toolkit errors."""


class InvalidCharacter(SankitError):
    """A symbol outside the script inventory was found in input text."""

    def __init__(self, position: int, char: str):
        self.position = position
        self.char = char
        super().__init__(f"invalid character {char!r} at position {position}")


class ParseError(SankitError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ConstraintViolation(SankitError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class IndexOutOfRange(SankitError, IndexError):
    pass


class NotAPath(SankitError):
    pass


class NonFiniteLoss(SankitError):
    def __init__(self, epoch: int):
        self.epoch = epoch
        super().__init__(f"non-finite loss at epoch {epoch}")


class CorruptFile(SankitError):
    pass


class VersionMismatch(SankitError):
    def __init__(self, found: int, expected: int):
        self.found = found
        self.expected = expected
        super().__init__(f"file format version {found}, reader expects {expected}")


class EmptyInput(SankitError):
    pass


class EmptyCorpus(SankitError):
    pass


class UnreachableLemma(SankitError):
    def __init__(self, token: str, lemma: str):
        self.token = token
        self.lemma = lemma
        super().__init__(f"no known edit script maps {token!r} to {lemma!r}")


class UnknownLabel(SankitError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"label {label!r} not in the model inventory")


class MissingGold(SankitError):
    def __init__(self, task: str):
        self.task = task
        super().__init__(f"corpus carries no gold annotation for task {task}")


class LengthMismatch(SankitError):
    pass


class TaskMismatch(SankitError):
    def __init__(self, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(f"inventory task is {found}, evaluator expects {expected}")


class InsufficientPairs(SankitError):
    pass


class SpanOutOfRange(SankitError):
    pass


class ConstituentJoinMismatch(SankitError):
    def __init__(self, joined: str, surface: str):
        self.joined = joined
        self.surface = surface
        super().__init__(f"constituents join to {joined!r}, token surface is {surface!r}")


class SessionNotFound(SankitError):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"no session {session_id}")


class SessionFinalized(SankitError):
    def __init__(self, session_id: str):
        self.session_id = session_id
        super().__init__(f"session {session_id} is finalized and immutable")


class InvalidCorrection(SankitError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(f"invalid correction: {reason}")


class FormatUnsupported(SankitError):
    def __init__(self, fmt: str):
        self.fmt = fmt
        super().__init__(f"unsupported export format {fmt!r}")


class ModelMissing(SankitError):
    def __init__(self, task: str):
        self.task = task
        super().__init__(f"no model loaded for task {task}")


class InvalidRequest(SankitError):
    pass
