"""Exception hierarchy shared by the library, CLI and HTTP service.

Every error carries a short machine-readable ``code`` so the service can
emit the uniform ``{"error": code, "message": text}`` body and the CLI can
map failures onto its exit-code contract.
"""


class GridsightError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ParseError(GridsightError):
    """Input document is not well-formed."""

    code = "parse-error"

    def __init__(self, message, byte_offset=None):
        super().__init__(message)
        self.byte_offset = byte_offset


class EmptyExtractError(GridsightError):
    """OSM document contained no usable nodes."""

    code = "empty-extract"


class EmptyGraphError(GridsightError):
    """Operation requires a graph with at least one vertex."""

    code = "empty-graph"


class InvalidVertexError(GridsightError):
    """A referenced vertex id does not exist in the graph."""

    code = "invalid-vertex"


class InvalidInputError(GridsightError):
    """Request or argument violates an operation precondition."""

    code = "invalid-input"


class InvalidConfigError(GridsightError):
    """Search configuration violates its invariants."""

    code = "invalid-config"


class UndefinedRatioError(GridsightError):
    """Detour ratio is 0/0 (vertex coincides with the anchor)."""

    code = "undefined-ratio"


class BudgetExceededError(GridsightError):
    """Exhaustive enumeration would exceed the configured budget."""

    code = "budget-exceeded"

    def __init__(self, message, required, budget):
        super().__init__(message)
        self.required = required
        self.budget = budget
