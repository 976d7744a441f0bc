"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input (bad ids, empty corpora, bad config)."""


class UndefinedStatisticError(ValueError):
    """A graph statistic is mathematically undefined for the given graph."""
