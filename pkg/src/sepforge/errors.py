"""Exception hierarchy shared across the sepforge package."""


class SepforgeError(Exception):
    """Base class for all errors raised by this package."""


class MinijSyntaxError(SepforgeError):
    """Malformed MiniJ source. Carries 1-based line/column of the offending token."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class MultipleMethodsError(SepforgeError):
    """More than one method declaration in a single source unit."""


class MalformedTreeError(SepforgeError):
    """An AST violates a structural invariant (bad kind, missing child, ...)."""


class DuplicateDeclarationError(SepforgeError):
    """A variable is declared twice in one method scope."""


class UnresolvedReceiverError(SepforgeError):
    """Strict label abstraction hit a receiver whose type is unknown."""


class ForeignAstNodeError(SepforgeError):
    """An AST node id was queried against a graph built from another method."""


class ModeMismatchError(SepforgeError):
    """Client graph and pattern were built under different abstraction modes."""


class DisconnectedFragmentError(SepforgeError):
    """canonical_code was asked to encode a disconnected graph fragment."""


class UnattachableMtsError(SepforgeError):
    """A transplant subtree has no determinable insertion point in the client."""


class InvalidResultError(SepforgeError):
    """A transformed method no longer re-parses (repair failure)."""


class CorpusFormatError(SepforgeError):
    """A change-example corpus directory does not follow the expected layout."""


class InternalInvariantError(SepforgeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
