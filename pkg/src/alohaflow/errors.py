"""Exception types shared across the package."""


class InvalidPmfError(ValueError):
    """A probability mass function literal violates its structural invariants
    (negative mass, masses not summing to one, bad support)."""


class PreconditionError(ValueError):
    """An operation was called with inputs outside its documented domain
    (e.g. a horizon shorter than the maximal hop count, a violation
    probability outside (0,1), an infeasible target mean)."""
