"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class StandoffParseError(ToolkitError):
    """A .ann line could not be parsed. Carries the 1-based line number."""

    def __init__(self, line_no: int, reason: str, doc_id: str = ""):
        self.line_no = line_no
        self.reason = reason
        self.doc_id = doc_id
        where = f"{doc_id}:" if doc_id else "line "
        super().__init__(f"{where}{line_no}: {reason}")


class RepairError(ToolkitError):
    """A document defect falls outside the supported repair rules."""


class FlattenError(ToolkitError):
    """A discontinuous entity cannot be rewritten without guessing."""


class SplitError(ToolkitError):
    """A corpus split specification is invalid or does not cover the corpus."""
