"""Exception hierarchy shared by the library and the CLI."""


class PossprevError(Exception):
    """Base class for every error raised by possprev."""


class ConstructionError(PossprevError, ValueError):
    """Invalid parameters for a fuzzy number, weighting function, risk or preference."""


class DomainError(PossprevError, ValueError):
    """A function was asked for a value outside its validity interval."""


class ModelMismatchError(PossprevError):
    """A scenario lacks (or mistypes) a background risk the model needs."""


class SolverError(PossprevError, AssertionError):
    """Internal assertion: the marginal-utility root could not be bracketed."""


class PairNotComparableError(PossprevError):
    """Two models do not differ by exactly one added period risk."""


class HypothesisNotMetError(PossprevError):
    """The scenario does not satisfy a sufficient-condition result's hypotheses."""


class WitnessNotFoundError(PossprevError):
    """The ambiguity search exhausted its budget without both orderings."""


class SchemaError(PossprevError):
    """A scenario document failed validation."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path:
            where = f"{path}: "
        if line is not None:
            where = f"line {line}: " + where
        super().__init__(where + message)
