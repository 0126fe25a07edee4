class DomainError(ValueError):
    """Input outside an operation's mathematical domain (e.g. N = 0)."""


class ConsistencyError(ValueError):
    pass


class OracleGuardError(ValueError):
    """Brute-force enumeration refused: item universe too large."""


class LatticeBoundError(ValueError):
    """Context has more attributes than the lattice builder accepts."""
