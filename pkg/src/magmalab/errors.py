"""Exception hierarchy shared by all magmalab modules."""


class MagmaLabError(Exception):
    """Base class for every error raised by magmalab."""


class ParseError(MagmaLabError):
    """Malformed term, identity or theory text.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at column {position + 1})"
        super().__init__(message)


class AmbiguityError(ParseError):
    """An unparenthesized chain mixes different operators."""


class InvalidPositionError(MagmaLabError):
    pass


class UnboundVariableError(MagmaLabError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"variable {name!r} has no value in the assignment")

    def __str__(self):
        return self.args[0]


class ModelFormatError(MagmaLabError):
    """A model file or table triple violates the model format."""


class ModelSizeError(ModelFormatError):
    pass


class SearchLimitExceeded(MagmaLabError):
    """Node or time limit hit before the search space was exhausted."""

    def __init__(self, message, nodes=0, seconds=0.0):
        self.nodes = nodes
        self.seconds = seconds
        super().__init__(message)


class ProofError(MagmaLabError):
    """A proof step or script failed to check.

    ``kind`` is one of ``"no-match"``, ``"ambiguous"``, ``"unresolved"``,
    ``"malformed"``, ``"duplicate"``.
    """

    def __init__(self, message, kind, step=None, script=None):
        self.kind = kind
        self.step = step
        self.script = script
        prefix = ""
        if script is not None:
            prefix += f"[{script}] "
        if step is not None:
            prefix += f"step {step}: "
        super().__init__(prefix + message)
