from typing import Optional


class Loc:
    """A source position, 1-based line and column."""

    __slots__ = ("line", "col")

    def __init__(self, line: int, col: int):
        self.line = line
        self.col = col

    def __repr__(self):
        return f"{self.line}:{self.col}"

    def __eq__(self, other):
        return isinstance(other, Loc) and (self.line, self.col) == (other.line, other.col)

    def __hash__(self):
        return hash((self.line, self.col))


class VtError(Exception):
    """Base class for every error vtkit raises on purpose."""

    def __init__(self, msg: str, loc: Optional[Loc] = None):
        self.msg = msg
        self.loc = loc
        super().__init__(f"{loc}: {msg}" if loc is not None else msg)


class VtSyntaxError(VtError):
    def __init__(self, line: int, col: int, msg: str):
        super().__init__(msg, Loc(line, col))
        self.line = line
        self.col = col


class VtTypeError(VtError):
    def __init__(self, loc: Optional[Loc], expected: str, found: str, msg: str = ""):
        self.expected = expected
        self.found = found
        super().__init__(msg or f"expected {expected}, found {found}", loc)


class UnresolvedNameError(VtError):
    def __init__(self, name: str, loc: Optional[Loc] = None):
        self.name = name
        super().__init__(f"unresolved name '{name}'", loc)


class DuplicateNameError(VtError):
    def __init__(self, name: str, loc: Optional[Loc] = None, what: str = "name"):
        self.name = name
        super().__init__(f"duplicate {what} '{name}'", loc)


class RuntimeFault(VtError):
    pass


class FuelExhausted(RuntimeFault):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"fuel exhausted after {budget} steps")


class ArityMismatch(RuntimeFault):
    pass


class MissingDecreasing(VtError):
    pass


class UnsupportedConstruct(VtError):
    pass


class Unencodable(VtError):
    def __init__(self, construct: str, loc: Optional[Loc] = None):
        self.construct = construct
        super().__init__(f"cannot encode {construct} in SMT-LIB", loc)


class SolverUnavailable(VtError):
    pass


class SolverError(VtError):
    def __init__(self, msg: str, transcript: str = ""):
        self.transcript = transcript
        super().__init__(msg)


class PreconditionExhausted(VtError):
    def __init__(self, attempts: int, accepted: int = 0):
        self.attempts = attempts
        self.accepted = accepted
        super().__init__(f"no input satisfied the precondition in {attempts} attempts")


class ValueDecodeError(VtError):
    pass


class ConfigError(VtError):
    pass
