"""Exception types raised by the toolkit."""


class ReductiveError(Exception):
    """Base class for all toolkit errors."""


class StructureViolation(ReductiveError):
    """A group description violates one of the Cartan decomposition axioms."""

    def __init__(self, axiom, detail="", residual=None):
        self.axiom = axiom
        self.detail = detail
        self.residual = residual
        msg = f"{axiom}"
        if detail:
            msg += f" ({detail})"
        if residual is not None:
            msg += f": residual {residual:.3e}"
        super().__init__(msg)


class DimensionMismatch(ReductiveError):
    pass


class NonFinite(ReductiveError):
    """The orbit flow produced a non-finite iterate."""

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class FlowFailed(ReductiveError):
    """The orbit flow did not reach a minimal vector within its budget."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotMinimal(ReductiveError):
    pass


class NoInvariantComplement(ReductiveError):
    pass


class EmptyResult(ReductiveError):
    def __init__(self, message, histogram=None):
        super().__init__(message)
        self.histogram = histogram or {}


class NoDenseStratum(ReductiveError):
    pass


class SearchBudgetExhausted(ReductiveError):
    pass


class ParseError(ReductiveError):
    """Config could not be parsed; carries the offending field and line when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} [{', '.join(where)}]"
        super().__init__(message)
