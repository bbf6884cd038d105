"""Exception types shared across the package."""


class NetworkError(ValueError):
    """Base class for malformed network files or structures."""


class NetworkSyntaxError(NetworkError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line} column {column}: {message}")
        self.line = line
        self.column = column


class NetworkSemanticError(NetworkError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class ContradictoryEvidence(ValueError):
    """A variable was re-observed with a different state."""


class ImpossibleEvidence(ArithmeticError):
    """The accumulated evidence has probability zero."""


class CutsetError(ValueError):
    """A node set does not cut every loop of the network."""


class NothingPending(RuntimeError):
    """No solved-stale instance is left to refine in the current epoch."""


class EnumerationCapExceeded(MemoryError):
    """The joint state space is larger than the configured enumeration cap."""
