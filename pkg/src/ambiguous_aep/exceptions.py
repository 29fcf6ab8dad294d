"""Exception hierarchy shared by all modules."""


class AEPError(Exception):
    """Base class for every error raised by this package."""


class InputError(AEPError, ValueError):
    """Malformed or inconsistent input (maps to CLI exit code 2)."""


class SolverError(AEPError, RuntimeError):
    """A numerical solver failed (maps to CLI exit code 3)."""


class SizeCapExceeded(AEPError):
    """An instance is larger than the configured cap; reduce n or raise the cap."""


class EmptySubset(InputError):
    pass


class WordTooShort(InputError):
    pass


class LengthMismatch(InputError):
    pass


class DomainError(InputError):
    pass


class SupportMismatch(InputError):
    """A pair distribution charges a transition the chain forbids."""


class InvalidStochasticMatrix(InputError):
    pass


class NotIrreducible(InputError):
    """The chain has more than one closed communicating class."""


class InfeasibleMass(InputError):
    pass


class SolverDiverged(SolverError):
    pass


class OracleFailure(SolverError):
    pass
