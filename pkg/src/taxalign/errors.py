"""Exceptions raised by the alignment engine."""


class TaxAlignError(Exception):
    """Base class for every error this package raises deliberately."""


class ParseError(TaxAlignError):
    """Malformed record in an input file."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif path is not None:
            where += " "
        super().__init__(where + message)


class DuplicateNodeError(ParseError):
    """A node id was declared twice in one taxonomy."""


class DanglingEdgeError(ParseError):
    """An edge references a node id that was never declared."""


class CycleError(TaxAlignError):
    """The hypernym relation contains a cycle."""

    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"hypernym graph contains a cycle through node {node_id!r}")


class ConstraintFormatError(TaxAlignError):
    """A constraint code or pack pattern is not valid."""


class UnknownNodeError(TaxAlignError):
    """A reference (pin, gold entry, mapping row) names a node that does not exist."""
